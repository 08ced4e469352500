//! Dealer outcome distributions.
//!
//! Two independent routes compute the unconditioned distribution `P`:
//!
//! * a backward decomposition on the last card drawn, built from the reach
//!   probabilities [`reach_hard`], [`reach_soft`], [`soft_to_hard`] and the
//!   composition sums [`comp_prob`] ([`dealer_dist_p_backward`]);
//! * a forward recursion over the dealer's running hand, memoized on the
//!   remaining deck ([`dealer_dist_p`]). The strategy code uses this one.
//!
//! `Q` is `P` conditioned on the dealer not holding a natural.
//!
//! A dealer who must draw from an exhausted deck is scored as a bust: the
//! bust bucket is the complement of every other outcome.

use std::cell::RefCell;

use rustc_hash::FxHashMap;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::card::CardValue;
use crate::deck::Deck;
use crate::error::{Error, Result};
use crate::hand::Hand;
use crate::memo::{DealerKey, Memo};
use crate::rules::Rules;

/// Final dealer result: 17..=21, 22 for a natural, 23 for a bust.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DealerOutcome(u8);

impl DealerOutcome {
    pub const NATURAL: DealerOutcome = DealerOutcome(22);
    pub const BUST: DealerOutcome = DealerOutcome(23);

    pub const ALL: [DealerOutcome; 7] = [
        DealerOutcome(17),
        DealerOutcome(18),
        DealerOutcome(19),
        DealerOutcome(20),
        DealerOutcome(21),
        DealerOutcome(22),
        DealerOutcome(23),
    ];

    pub fn from_code(code: u8) -> Result<DealerOutcome> {
        if (17..=23).contains(&code) {
            Ok(DealerOutcome(code))
        } else {
            Err(Error::InvalidArgument(format!("dealer outcome must be 17..=23, got {code}")))
        }
    }

    #[inline]
    pub fn code(self) -> u8 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        (self.0 - 17) as usize
    }

    pub fn label(self) -> &'static str {
        ["17", "18", "19", "20", "21", "natural", "bust"][self.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Measure {
    P,
    Q,
}

/// Probabilities of the seven dealer outcomes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DealerDist {
    probs: [f64; 7],
    measure: Measure,
}

impl DealerDist {
    pub fn new(probs: [f64; 7], measure: Measure) -> DealerDist {
        DealerDist { probs, measure }
    }

    #[inline]
    pub fn prob(&self, outcome: DealerOutcome) -> f64 {
        self.probs[outcome.index()]
    }

    /// Probabilities indexed by `code - 17`.
    pub fn probs(&self) -> &[f64; 7] {
        &self.probs
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().sum()
    }
}

impl Serialize for DealerDist {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(8))?;
        map.serialize_entry("measure", &self.measure)?;
        for outcome in DealerOutcome::ALL {
            map.serialize_entry(outcome.label(), &self.prob(outcome))?;
        }
        map.end()
    }
}

/// Probability that the dealer's hole card completes a natural. `deck`
/// excludes the upcard.
pub fn natural_prob(deck: &Deck, up: CardValue) -> Result<f64> {
    if deck.is_empty() {
        return Err(Error::EmptyDeck);
    }
    match up.natural_partner() {
        Some(partner) => deck.prob_p(partner),
        None => Ok(0.0),
    }
}

/// Probability of no natural, computed from counts to avoid `1 - p`.
fn no_natural_prob(deck: &Deck, up: CardValue) -> Result<f64> {
    let Some(partner) = up.natural_partner() else {
        return Ok(1.0);
    };
    if deck.is_empty() {
        return Err(Error::EmptyDeck);
    }
    let t = deck.total();
    let a = deck.count(partner) as u32;
    if a == t {
        return Err(Error::DegenerateCondition);
    }
    Ok((t - a) as f64 / t as f64)
}

/// Probability that the next cards, drawn without replacement, add up to
/// exactly `a` (summed over every ordered composition of `a`).
pub fn comp_prob(a: u8, deck: &Deck) -> Result<f64> {
    if a > 6 {
        return Err(Error::InvalidArgument(format!("composition sum must be at most 6, got {a}")));
    }
    Ok(comp(a, deck))
}

fn comp(a: u8, deck: &Deck) -> f64 {
    if a == 0 {
        return 1.0;
    }
    let probs = deck.probs_p();
    let mut total = 0.0;
    for i in 1..=a.min(10) {
        let k = CardValue::from_index(i as usize - 1);
        let p = probs[k.index()];
        if p > 0.0 {
            total += p * comp(a - i, &deck.removed(k));
        }
    }
    total
}

/// Probability of a composition of `a` followed by a composition of `b`.
pub fn comp_prob2(a: u8, b: u8, deck: &Deck) -> Result<f64> {
    if a > 5 || b > 5 {
        return Err(Error::InvalidArgument(format!(
            "composition sums must be at most 5, got ({a}, {b})"
        )));
    }
    Ok(comp2(a, b, deck))
}

fn comp2(a: u8, b: u8, deck: &Deck) -> f64 {
    if a == 0 {
        return comp(b, deck);
    }
    if b == 0 {
        return comp(a, deck);
    }
    let probs = deck.probs_p();
    let mut total = 0.0;
    for i in 1..=a {
        let k = CardValue::from_index(i as usize - 1);
        let p = probs[k.index()];
        if p > 0.0 {
            total += p * comp2(a - i, b, &deck.removed(k));
        }
    }
    total
}

fn check_target(e: u8) -> Result<()> {
    if e > 17 {
        return Err(Error::InvalidArgument(format!("reach target must be at most 17, got {e}")));
    }
    Ok(())
}

/// Probability that a dealer holding hard `start` passes through hard `e`
/// (`e <= 17`) while drawing.
///
/// Small cards recurse on the hard ladder, an ace below hard 11 turns the
/// hand soft and continues in [`soft_to_hard`], and once the hand is hard 11
/// or more every further card (aces count one) is a composition of the
/// remaining gap.
pub fn reach_hard(start: u8, e: u8, deck: &Deck, rules: &Rules) -> Result<f64> {
    check_target(e)?;
    Ok(hard_reach(start, e, deck, rules))
}

fn hard_reach(h: u8, e: u8, deck: &Deck, rules: &Rules) -> f64 {
    if e == h {
        return 1.0;
    }
    if e < h || h > 16 {
        return 0.0;
    }
    if h >= 11 {
        return comp(e - h, deck);
    }
    let probs = deck.probs_p();
    let mut total = 0.0;
    let p_ace = probs[0];
    if p_ace > 0.0 && h + 11 <= rules.dealer_soft_hit_max() {
        total += p_ace * soft_hard(h + 11, e, &deck.removed(CardValue::ACE), rules);
    }
    for i in 2..=(e - h).min(10) {
        let k = CardValue::from_index(i as usize - 1);
        let p = probs[k.index()];
        if p > 0.0 {
            let rest = deck.removed(k);
            total += p * if h + i < 11 {
                hard_reach(h + i, e, &rest, rules)
            } else {
                comp(e - h - i, &rest)
            };
        }
    }
    total
}

/// Probability that a dealer holding soft `start` loses the eleven-ace and
/// passes through hard `e` (`e <= 17`).
pub fn soft_to_hard(start: u8, e: u8, deck: &Deck, rules: &Rules) -> Result<f64> {
    check_target(e)?;
    if !(11..=21).contains(&start) {
        return Err(Error::InvalidArgument(format!("soft total must be 11..=21, got {start}")));
    }
    Ok(soft_hard(start, e, deck, rules))
}

fn soft_hard(s: u8, e: u8, deck: &Deck, rules: &Rules) -> f64 {
    // A demoted hand is at least hard 12.
    if e < 12 || s > rules.dealer_soft_hit_max() {
        return 0.0;
    }
    let probs = deck.probs_p();
    let mut total = 0.0;
    for (idx, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let k = CardValue::from_index(idx);
        let n = s + k.value();
        if n <= 21 {
            if n <= rules.dealer_soft_hit_max() {
                total += p * soft_hard(n, e, &deck.removed(k), rules);
            }
        } else {
            let h = n - 10;
            if h == e {
                total += p;
            } else if h < e {
                total += p * comp(e - h, &deck.removed(k));
            }
        }
    }
    total
}

/// Probability that a dealer holding `start` passes through soft `e`.
pub fn reach_soft(start: Hand, e: u8, deck: &Deck, rules: &Rules) -> Result<f64> {
    if !(11..=21).contains(&e) {
        return Err(Error::InvalidArgument(format!("soft target must be 11..=21, got {e}")));
    }
    Ok(soft_reach(start, e, deck, rules))
}

fn soft_reach(start: Hand, e: u8, deck: &Deck, rules: &Rules) -> f64 {
    let probs = deck.probs_p();
    if start.is_soft() {
        let s = start.total();
        if s == e {
            return 1.0;
        }
        if s > e || !rules.dealer_hits(start) {
            return 0.0;
        }
        let mut total = 0.0;
        for (idx, &p) in probs.iter().enumerate() {
            let n = s + idx as u8 + 1;
            if p > 0.0 && n <= e {
                let k = CardValue::from_index(idx);
                total += p * soft_reach(Hand::new(n, true).unwrap_or_default(), e, &deck.removed(k), rules);
            }
        }
        total
    } else {
        let h = start.total();
        if h >= 11 {
            return 0.0;
        }
        let mut total = 0.0;
        if probs[0] > 0.0 && h + 11 <= e {
            let soft = start + CardValue::ACE;
            total += probs[0] * soft_reach(soft, e, &deck.removed(CardValue::ACE), rules);
        }
        for (idx, &p) in probs.iter().enumerate().skip(1) {
            let k = CardValue::from_index(idx);
            if p > 0.0 && h + k.value() <= 10 {
                total += p * soft_reach(start + k, e, &deck.removed(k), rules);
            }
        }
        total
    }
}

fn hard_part(start: Hand, e: u8, deck: &Deck, rules: &Rules) -> f64 {
    if start.is_soft() {
        soft_hard(start.total(), e, deck, rules)
    } else {
        hard_reach(start.total(), e, deck, rules)
    }
}

/// Probability of passing through total `e` (`e <= 17`), soft or hard.
pub fn reach_17(start: Hand, e: u8, deck: &Deck, rules: &Rules) -> Result<f64> {
    check_target(e)?;
    let soft = if e >= 11 { soft_reach(start, e, deck, rules) } else { 0.0 };
    Ok(soft + hard_part(start, e, deck, rules))
}

/// `P[D = e]` for `e` in 17..=21 by decomposing on the dealer's last card.
/// The 21 bucket still contains the natural. `deck` excludes the upcard.
pub fn dealer_outcome_prob(up: CardValue, e: u8, deck: &Deck, rules: &Rules) -> Result<f64> {
    if !(17..=21).contains(&e) {
        return Err(Error::InvalidArgument(format!("dealer total must be 17..=21, got {e}")));
    }
    if deck.is_empty() {
        return Err(Error::EmptyDeck);
    }
    let start = Hand::from_card(up);
    if e == 17 {
        let hard = hard_part(start, 17, deck, rules);
        return Ok(if rules.dealer_hits_soft17 {
            hard
        } else {
            hard + soft_reach(start, 17, deck, rules)
        });
    }
    let probs = deck.probs_p();
    let mut total = 0.0;
    for (idx, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let k = CardValue::from_index(idx);
        let i = k.value();
        let rest = deck.removed(k);
        let pre = e - i;
        // hard pre-total; an ace only counts one on hard 11 or more
        if pre <= 16 && (i >= 2 || pre >= 11) {
            total += p * hard_part(start, pre, &rest, rules);
        }
        // soft pre-total that keeps drawing
        if (11..=rules.dealer_soft_hit_max()).contains(&pre) {
            total += p * soft_reach(start, pre, &rest, rules);
        }
        // ace counted as eleven on a hard total of at most ten
        if k.is_ace() {
            total += p * hard_part(start, e - 11, &rest, rules);
        }
    }
    Ok(total)
}

/// Unconditioned distribution assembled from [`dealer_outcome_prob`].
pub fn dealer_dist_p_backward(up: CardValue, deck: &Deck, rules: &Rules) -> Result<DealerDist> {
    let mut probs = [0.0; 7];
    for e in 17..=21u8 {
        probs[(e - 17) as usize] = dealer_outcome_prob(up, e, deck, rules)?;
    }
    let natural = natural_prob(deck, up)?;
    probs[4] -= natural;
    probs[5] = natural;
    probs[6] = 1.0 - probs[..6].iter().sum::<f64>();
    Ok(DealerDist::new(probs, Measure::P))
}

type ForwardKey = (Hand, bool, Deck);

thread_local! {
    static FORWARD_SCRATCH: RefCell<FxHashMap<ForwardKey, [f64; 7]>> =
        RefCell::new(FxHashMap::default());
}

fn forward_from(
    hand: Hand,
    first: bool,
    deck: &Deck,
    rules: &Rules,
    memo: &mut FxHashMap<ForwardKey, [f64; 7]>,
) -> [f64; 7] {
    let key = (hand, first, *deck);
    if let Some(v) = memo.get(&key) {
        return *v;
    }
    let mut out = [0.0; 7];
    if deck.is_empty() {
        out[6] = 1.0;
        return out;
    }
    let probs = deck.probs_p();
    for (idx, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let k = CardValue::from_index(idx);
        let next = hand + k;
        if first && next.total() == 21 {
            out[5] += p;
        } else if next.is_bust() {
            out[6] += p;
        } else if !rules.dealer_hits(next) {
            out[(next.total() - 17) as usize] += p;
        } else {
            let sub = forward_from(next, false, &deck.removed(k), rules, memo);
            for (o, s) in out.iter_mut().zip(sub) {
                *o += p * s;
            }
        }
    }
    memo.insert(key, out);
    out
}

/// Unconditioned distribution by forward recursion. `deck` excludes the
/// upcard and still holds the hole card.
pub fn dealer_dist_p(up: CardValue, deck: &Deck, rules: &Rules) -> Result<DealerDist> {
    if deck.is_empty() {
        return Err(Error::EmptyDeck);
    }
    let probs = FORWARD_SCRATCH.with(|scratch| {
        let mut memo = scratch.borrow_mut();
        memo.clear();
        forward_from(Hand::from_card(up), true, deck, rules, &mut memo)
    });
    Ok(DealerDist::new(probs, Measure::P))
}

/// [`dealer_dist_p`] through a memo table.
pub fn dealer_dist_p_memo<M: Memo + ?Sized>(
    up: CardValue,
    deck: &Deck,
    rules: &Rules,
    memo: &M,
) -> Result<DealerDist> {
    let key = DealerKey {
        up,
        deck: *deck,
        h17: rules.dealer_hits_soft17,
    };
    if let Some(probs) = memo.dealer(&key) {
        return Ok(DealerDist::new(probs, Measure::P));
    }
    let dist = dealer_dist_p(up, deck, rules)?;
    memo.store_dealer(key, dist.probs);
    Ok(dist)
}

/// Condition an unconditioned distribution on "no dealer natural".
pub fn condition_on_no_natural(p: &DealerDist, up: CardValue, deck: &Deck) -> Result<DealerDist> {
    let keep = no_natural_prob(deck, up)?;
    let mut probs = p.probs;
    for (i, q) in probs.iter_mut().enumerate() {
        *q = if i == 5 { 0.0 } else { *q / keep };
    }
    Ok(DealerDist::new(probs, Measure::Q))
}

/// Dealer distribution given that the dealer has no natural.
pub fn dealer_dist_q(up: CardValue, deck: &Deck, rules: &Rules) -> Result<DealerDist> {
    no_natural_prob(deck, up)?;
    condition_on_no_natural(&dealer_dist_p(up, deck, rules)?, up, deck)
}

pub fn dealer_dist_q_memo<M: Memo + ?Sized>(
    up: CardValue,
    deck: &Deck,
    rules: &Rules,
    memo: &M,
) -> Result<DealerDist> {
    no_natural_prob(deck, up)?;
    condition_on_no_natural(&dealer_dist_p_memo(up, deck, rules, memo)?, up, deck)
}
