//! Whole-game expectation under optimal play and the effect of removing
//! cards from the shoe.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::card::CardValue;
use crate::dealer::natural_prob;
use crate::deck::Deck;
use crate::error::{Error, Result};
use crate::memo::Memo;
use crate::rules::Rules;
use crate::strategy::Solver;

/// Probability that the player's first two cards are `first` then
/// `second`, given the dealer shows `up` and has no natural. `deck`
/// excludes the upcard.
pub fn pair_prob_q(first: CardValue, second: CardValue, up: CardValue, deck: &Deck) -> Result<f64> {
    let p_first = deck.prob_q(first, up)?;
    if p_first <= 0.0 {
        return Ok(0.0);
    }
    Ok(p_first * deck.without(first)?.prob_q(second, up)?)
}

/// Probability of a two-card natural from `deck`.
fn natural_pair_prob(deck: &Deck) -> Result<f64> {
    let p_ace = deck.prob_p(CardValue::ACE)?;
    if p_ace <= 0.0 {
        return Ok(0.0);
    }
    let rest = deck.without(CardValue::ACE)?;
    if rest.is_empty() {
        return Ok(0.0);
    }
    Ok(2.0 * p_ace * rest.prob_p(CardValue::TEN)?)
}

/// Unordered starting hands `(i, j)` with `i <= j`.
fn starting_pairs() -> impl Iterator<Item = (CardValue, CardValue)> {
    CardValue::ALL
        .into_iter()
        .flat_map(|a| CardValue::ALL.into_iter().filter(move |b| *b >= a).map(move |b| (a, b)))
}

fn check_dealable(deck: &Deck) -> Result<()> {
    if !deck.is_infinite() && deck.total() < 4 {
        return Err(Error::InvalidArgument(format!(
            "a round needs at least four cards, the deck has {}",
            deck.total()
        )));
    }
    Ok(())
}

/// Expected win of the no-natural branch for one starting hand, weighted
/// by the probability of both orders.
fn pair_term<M: Memo + ?Sized>(
    solver: &Solver<'_, M>,
    (a, b): (CardValue, CardValue),
    up: CardValue,
    deck: &Deck,
) -> Result<f64> {
    let mut weight = pair_prob_q(a, b, up, deck)?;
    if a != b {
        weight += pair_prob_q(b, a, up, deck)?;
    }
    if weight <= 0.0 {
        return Ok(0.0);
    }
    let ev = if a.is_natural_with(b) {
        Rules::NATURAL_PAYOUT
    } else {
        let rest = deck.without_all(&[a, b])?;
        solver.best_action(a, b, up, &rest)?.best_ev()
    };
    Ok(weight * ev)
}

/// Combine the no-natural sum with the dealer-natural branch.
fn combine_upcard(up: CardValue, deck: &Deck, no_natural_sum: f64) -> Result<f64> {
    let Some(partner) = up.natural_partner() else {
        return Ok(no_natural_sum);
    };
    let p_natural = natural_prob(deck, up)?;
    let mut ev = 0.0;
    if p_natural > 0.0 {
        let player_natural = natural_pair_prob(&deck.without(partner)?)?;
        ev -= p_natural * (1.0 - player_natural);
    }
    let t = deck.total();
    let keep = (t - deck.count(partner) as u32) as f64 / t as f64;
    if keep > 0.0 {
        ev += keep * no_natural_sum;
    }
    Ok(ev)
}

fn no_natural_possible(up: CardValue, deck: &Deck) -> bool {
    match up.natural_partner() {
        Some(partner) => deck.is_infinite() || (deck.count(partner) as u32) < deck.total(),
        None => true,
    }
}

/// Expected win given the dealer's upcard. `deck` is the pre-deal shoe
/// without the upcard.
pub fn expected_win_upcard<M: Memo + ?Sized>(solver: &Solver<'_, M>, up: CardValue, deck: &Deck) -> Result<f64> {
    if !deck.is_infinite() && deck.total() < 3 {
        return Err(Error::InvalidArgument("not enough cards to deal the player".into()));
    }
    let mut sum = 0.0;
    if no_natural_possible(up, deck) {
        for pair in starting_pairs() {
            sum += pair_term(solver, pair, up, deck)?;
        }
    }
    combine_upcard(up, deck, sum)
}

/// Expected win per unit bet and its split by dealer upcard.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GameExpectation {
    pub ew: f64,
    pub per_upcard: BTreeMap<CardValue, f64>,
}

/// Expected win of a round dealt from `deck` under optimal play.
///
/// Work is spread over (upcard, starting hand) pairs; partial results are
/// summed in a fixed order so the value does not depend on scheduling.
pub fn expected_win<M: Memo + Sync + ?Sized>(solver: &Solver<'_, M>, deck: &Deck) -> Result<GameExpectation> {
    check_dealable(deck)?;
    let pairs: Vec<_> = starting_pairs().collect();
    let ups: Vec<(CardValue, f64, Deck)> = CardValue::ALL
        .into_iter()
        .filter(|&up| deck.count(up) > 0)
        .map(|up| Ok((up, deck.prob_p(up)?, deck.without(up)?)))
        .collect::<Result<_>>()?;
    let tasks: Vec<(usize, (CardValue, CardValue))> = ups
        .iter()
        .enumerate()
        .filter(|(_, (up, _, rest))| no_natural_possible(*up, rest))
        .flat_map(|(u, _)| pairs.iter().map(move |&pair| (u, pair)))
        .collect();
    let terms: Vec<f64> = tasks
        .par_iter()
        .map(|&(u, pair)| {
            let (up, _, rest) = &ups[u];
            pair_term(solver, pair, *up, rest)
        })
        .collect::<Result<_>>()?;

    let mut sums = vec![0.0; ups.len()];
    for (&(u, _), term) in tasks.iter().zip(&terms) {
        sums[u] += term;
    }
    let mut per_upcard = BTreeMap::new();
    let mut ew = 0.0;
    for ((up, weight, rest), sum) in ups.iter().zip(sums) {
        let e = combine_upcard(*up, rest, sum)?;
        per_upcard.insert(*up, e);
        ew += weight * e;
    }
    Ok(GameExpectation { ew, per_upcard })
}

/// Change in expected win from removing one card of each value:
/// `r[i] = E[W | deck - {i}] - E[W | deck]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovalEffects {
    pub base_ew: f64,
    /// Ace first; `None` when no card of that value is left.
    pub r: [Option<f64>; 10],
}

impl RemovalEffects {
    pub fn get(&self, k: CardValue) -> Option<f64> {
        self.r[k.index()]
    }
}

pub fn removal_effects<M: Memo + Sync + ?Sized>(solver: &Solver<'_, M>, deck: &Deck) -> Result<RemovalEffects> {
    if deck.is_infinite() {
        return Err(Error::InvalidArgument("removal effects need a finite deck".into()));
    }
    let base_ew = expected_win(solver, deck)?.ew;
    let mut r = [None; 10];
    for k in CardValue::ALL {
        if deck.count(k) > 0 {
            r[k.index()] = Some(expected_win(solver, &deck.without(k)?)?.ew - base_ew);
        }
    }
    Ok(RemovalEffects { base_ew, r })
}

/// Removal effects for several shoe sizes, used to interpolate the effect
/// of a card removed from a partly depleted shoe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemovalTable {
    /// `(number of decks, effects)`, sorted by number of decks.
    pub columns: Vec<(u32, RemovalEffects)>,
}

impl RemovalTable {
    pub fn new(mut columns: Vec<(u32, RemovalEffects)>) -> Result<RemovalTable> {
        if columns.is_empty() {
            return Err(Error::InvalidArgument("removal table has no columns".into()));
        }
        columns.sort_by_key(|(n, _)| *n);
        if columns.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("duplicate deck count in removal table".into()));
        }
        Ok(RemovalTable { columns })
    }

    /// Compute the table for `decks` from scratch.
    pub fn compute<M: Memo + Sync + ?Sized>(solver: &Solver<'_, M>, decks: &[u32]) -> Result<RemovalTable> {
        let columns = decks
            .iter()
            .map(|&n| Ok((n, removal_effects(solver, &Deck::new(n)?)?)))
            .collect::<Result<Vec<_>>>()?;
        RemovalTable::new(columns)
    }

    /// Effect of removing a card of value `k` from a shoe of `decks`
    /// (possibly fractional) decks, interpolated linearly between the two
    /// nearest columns and extrapolated from the outermost segment.
    pub fn effect(&self, k: CardValue, decks: f64) -> Result<f64> {
        let points: Vec<(f64, f64)> = self
            .columns
            .iter()
            .filter_map(|(n, e)| e.get(k).map(|r| (*n as f64, r)))
            .collect();
        match points.as_slice() {
            [] => Err(Error::InvalidArgument(format!("no removal effect for card {k}"))),
            [(_, r)] => Ok(*r),
            _ => {
                let seg = points
                    .windows(2)
                    .position(|w| decks <= w[1].0)
                    .unwrap_or(points.len() - 2);
                let (x0, y0) = points[seg];
                let (x1, y1) = points[seg + 1];
                Ok(y0 + (y1 - y0) * (decks - x0) / (x1 - x0))
            }
        }
    }
}

/// Linear estimate of the expected win after `removed` cards leave the
/// shoe `initial` whose exact expected win is `base_ew`.
///
/// The m-th removed copy of value `i` is priced at the shoe size whose
/// full complement of `i` equals the copies still present before it is
/// removed, i.e. `(a_i - m + 1) / c_i` decks with `c_i` = 4 (16 for tens).
pub fn estimate_ew(initial: &Deck, removed: &[CardValue], table: &RemovalTable, base_ew: f64) -> Result<f64> {
    if initial.is_infinite() {
        return Err(Error::InvalidArgument("estimates need a finite shoe".into()));
    }
    let mut taken = [0u16; 10];
    let mut ew = base_ew;
    for &k in removed {
        let left = initial
            .count(k)
            .checked_sub(taken[k.index()])
            .filter(|&n| n > 0)
            .ok_or(Error::EmptyRank(k.value()))?;
        let per_deck = if k == CardValue::TEN { 16.0 } else { 4.0 };
        ew += table.effect(k, left as f64 / per_deck)?;
        taken[k.index()] += 1;
    }
    Ok(ew)
}
