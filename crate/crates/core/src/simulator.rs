//! Monte Carlo cross-check of the exact engine.
//!
//! Cards are drawn without replacement from the live [`Deck`] counts.
//! The generator is Xoshiro256++ seeded with `seed_from_u64(seed)`; trials
//! are split over [`SHARDS`] fixed sub-streams obtained with `jump()`, and
//! shard results are merged in shard order, so a report depends only on
//! the inputs and the seed.
//!
//! Round simulation plays the player with the engine's decisions. Each
//! split hand decides from a view that excludes the upcard, the pair
//! cards and its own cards only; cards dealt to sibling hands are treated
//! as unseen. That is the information structure under which the engine
//! values a split as twice one hand.

use std::collections::BTreeMap;

use dashmap::DashMap;
use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use rustc_hash::FxBuildHasher;
use serde::Serialize;

use crate::card::CardValue;
use crate::dealer::DealerOutcome;
use crate::deck::Deck;
use crate::error::{Error, Result};
use crate::hand::Hand;
use crate::memo::Memo;
use crate::rules::Rules;
use crate::strategy::{Action, Solver};

/// Number of independent sub-streams a simulation is split into.
pub const SHARDS: usize = 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    /// Completed trials.
    pub n: u64,
    /// Trials abandoned because the shoe ran out. The exact engine scores
    /// an exhausted dealer as a bust, so such trials are left out rather
    /// than counted; they need a shoe of a dozen cards or fewer.
    pub aborted: u64,
    pub seed: u64,
    /// Relative frequency of each outcome label over completed trials.
    pub freq: BTreeMap<String, f64>,
    /// Mean of the per-trial value: the bust indicator for dealer runs,
    /// the net win for rounds.
    pub mean: f64,
    /// Sample standard deviation of the per-trial value over `sqrt(n)`.
    pub stderr: f64,
}

impl SimReport {
    pub fn freq_of(&self, label: &str) -> f64 {
        self.freq.get(label).copied().unwrap_or(0.0)
    }

    /// Standard error of an outcome frequency.
    pub fn freq_stderr(&self, label: &str) -> f64 {
        let p = self.freq_of(label);
        (p * (1.0 - p) / self.n as f64).sqrt()
    }
}

#[derive(Default)]
struct Tally {
    n: u64,
    aborted: u64,
    counts: BTreeMap<String, u64>,
    sum: f64,
    sum_sq: f64,
}

impl Tally {
    fn record(&mut self, label: String, value: f64) {
        self.n += 1;
        *self.counts.entry(label).or_default() += 1;
        self.sum += value;
        self.sum_sq += value * value;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.n += other.n;
        self.aborted += other.aborted;
        for (label, c) in other.counts {
            *self.counts.entry(label).or_default() += c;
        }
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    fn into_report(self, seed: u64) -> SimReport {
        let n = self.n;
        let freq = self
            .counts
            .into_iter()
            .map(|(label, c)| (label, c as f64 / n as f64))
            .collect();
        let (mean, stderr) = if n == 0 {
            (0.0, 0.0)
        } else {
            let mean = self.sum / n as f64;
            let var = if n > 1 {
                ((self.sum_sq - n as f64 * mean * mean) / (n - 1) as f64).max(0.0)
            } else {
                0.0
            };
            (mean, (var / n as f64).sqrt())
        };
        SimReport {
            n,
            aborted: self.aborted,
            seed,
            freq,
            mean,
            stderr,
        }
    }
}

fn shard_streams(seed: u64) -> Vec<Xoshiro256PlusPlus> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    (0..SHARDS)
        .map(|_| {
            let stream = rng.clone();
            rng.jump();
            stream
        })
        .collect()
}

fn shard_sizes(n: u64) -> Vec<u64> {
    let base = n / SHARDS as u64;
    let extra = n % SHARDS as u64;
    (0..SHARDS as u64).map(|s| base + u64::from(s < extra)).collect()
}

fn run_sharded<F>(n: u64, seed: u64, trial: F) -> Result<SimReport>
where
    F: Fn(&mut Xoshiro256PlusPlus, &mut Tally) -> Result<()> + Sync,
{
    if n == 0 {
        return Err(Error::InvalidArgument("number of trials must be at least 1".into()));
    }
    let tallies = shard_streams(seed)
        .into_par_iter()
        .zip(shard_sizes(n))
        .map(|(mut rng, size)| {
            let mut tally = Tally::default();
            for _ in 0..size {
                trial(&mut rng, &mut tally)?;
            }
            Ok(tally)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = tallies.into_iter().fold(Tally::default(), Tally::merge);
    Ok(total.into_report(seed))
}

/// Play out a dealer hand from `hand`; `None` when the dealer must draw
/// from an empty shoe.
fn play_dealer(mut hand: Hand, two_cards: bool, shoe: &mut Deck, rules: &Rules, rng: &mut Xoshiro256PlusPlus) -> Option<DealerOutcome> {
    if two_cards && hand.total() == 21 {
        return Some(DealerOutcome::NATURAL);
    }
    while rules.dealer_hits(hand) {
        hand += shoe.draw(rng).ok()?;
    }
    Some(if hand.is_bust() {
        DealerOutcome::BUST
    } else {
        DealerOutcome::from_code(hand.total()).expect("dealer stands on 17..=21")
    })
}

/// Sample dealer outcomes for upcard `up`; `deck` excludes the upcard.
pub fn simulate_dealer(up: CardValue, deck: &Deck, rules: &Rules, n: u64, seed: u64) -> Result<SimReport> {
    if deck.is_empty() {
        return Err(Error::EmptyDeck);
    }
    run_sharded(n, seed, |rng, tally| {
        let mut shoe = *deck;
        let hole = shoe.draw(rng)?;
        let hand = Hand::from_card(up) + hole;
        match play_dealer(hand, true, &mut shoe, rules, rng) {
            Some(outcome) => {
                let bust = f64::from(u8::from(outcome == DealerOutcome::BUST));
                tally.record(outcome.label().to_string(), bust);
            }
            None => tally.aborted += 1,
        }
        Ok(())
    })
}

/// A decision point: what is known and which options are open.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Spot {
    /// Two-card starting hand.
    Start(CardValue, CardValue),
    /// Three or more cards, or a hand that may no longer double.
    Drawn(Hand),
    /// Post-split hand before its first decision.
    AfterSplit(Hand),
    /// A split ace that drew another ace.
    AceResplit,
    /// A split pair card that drew its twin.
    PairResplit(CardValue, Hand),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct DecisionKey {
    spot: Spot,
    up: CardValue,
    view: Deck,
}

/// Chosen option at a decision point; `Split` also marks a re-split.
type Decisions = DashMap<DecisionKey, Action, FxBuildHasher>;

struct Player<'a, 'm, M: Memo + ?Sized> {
    solver: &'a Solver<'m, M>,
    decisions: &'a Decisions,
    up: CardValue,
}

enum Draw {
    Card(CardValue),
    Exhausted,
}

fn draw(shoe: &mut Deck, rng: &mut Xoshiro256PlusPlus) -> Draw {
    match shoe.draw(rng) {
        Ok(k) => Draw::Card(k),
        Err(_) => Draw::Exhausted,
    }
}

impl<M: Memo + ?Sized> Player<'_, '_, M> {
    fn decide(&self, spot: Spot, view: &Deck) -> Result<Action> {
        let key = DecisionKey {
            spot,
            up: self.up,
            view: *view,
        };
        if let Some(a) = self.decisions.get(&key) {
            return Ok(*a);
        }
        let s = self.solver;
        let up = self.up;
        let action = match spot {
            Spot::Start(a, b) => s.best_action(a, b, up, view)?.best,
            Spot::Drawn(hand) => {
                if hand.total() >= 21 || !view.can_deal_player() {
                    Action::Stand
                } else if s.ev_hit(hand, up, view)? > s.ev_stand(hand, up, view)? {
                    Action::Hit
                } else {
                    Action::Stand
                }
            }
            Spot::AfterSplit(hand) => {
                let stand = s.ev_stand(hand, up, view)?;
                if hand.total() >= 21 || !view.can_deal_player() {
                    Action::Stand
                } else {
                    let hit = s.ev_hit(hand, up, view)?;
                    let double = if s.rules().das {
                        Some(s.ev_double(hand, up, view)?)
                    } else {
                        None
                    };
                    crate::strategy::ActionEvaluation::new(stand, Some(hit), double, None).best
                }
            }
            Spot::AceResplit => {
                let stand = s.ev_stand(Hand::from_cards(&[CardValue::ACE, CardValue::ACE]), up, view)?;
                let split = s.ev_split_aces(up, view, false)?;
                if split > stand {
                    Action::Split
                } else {
                    Action::Stand
                }
            }
            Spot::PairResplit(card, hand) => {
                let play = s.ev_no_split(hand, up, view)?;
                let split = s.ev_split(card, up, view, false)?;
                if split > play {
                    Action::Split
                } else {
                    Action::Stand
                }
            }
        };
        self.decisions.insert(key, action);
        Ok(action)
    }

    /// Hit or stand until done; returns the final hand.
    fn hit_out(&self, mut hand: Hand, mut view: Deck, shoe: &mut Deck, rng: &mut Xoshiro256PlusPlus) -> Result<Option<Hand>> {
        while self.decide(Spot::Drawn(hand), &view)? == Action::Hit {
            let Draw::Card(k) = draw(shoe, rng) else {
                return Ok(None);
            };
            view.remove(k)?;
            hand += k;
        }
        Ok(Some(hand))
    }

    /// Play one post-split hand; returns (final hand, bet multiplier).
    fn play_after_split(&self, hand: Hand, view: Deck, shoe: &mut Deck, rng: &mut Xoshiro256PlusPlus) -> Result<Option<(Hand, f64)>> {
        match self.decide(Spot::AfterSplit(hand), &view)? {
            Action::Double => {
                let Draw::Card(k) = draw(shoe, rng) else {
                    return Ok(None);
                };
                Ok(Some((hand + k, 2.0)))
            }
            Action::Hit => {
                let Draw::Card(k) = draw(shoe, rng) else {
                    return Ok(None);
                };
                let mut view = view;
                view.remove(k)?;
                Ok(self.hit_out(hand + k, view, shoe, rng)?.map(|h| (h, 1.0)))
            }
            _ => Ok(Some((hand, 1.0))),
        }
    }

    /// Split hands for a pair of aces. `view` excludes the upcard and the
    /// aces split so far.
    fn split_aces(&self, view: Deck, may_resplit: bool, shoe: &mut Deck, rng: &mut Xoshiro256PlusPlus, out: &mut Vec<(Hand, f64)>) -> Result<bool> {
        for _ in 0..2 {
            let Draw::Card(k) = draw(shoe, rng) else {
                return Ok(false);
            };
            let own = view.without(k)?;
            if may_resplit && k.is_ace() && own.can_deal_player() && self.decide(Spot::AceResplit, &own)? == Action::Split {
                if !self.split_aces(own, false, shoe, rng, out)? {
                    return Ok(false);
                }
            } else {
                out.push((Hand::from_cards(&[CardValue::ACE, k]), 1.0));
            }
        }
        Ok(true)
    }

    /// Split hands for a non-ace pair. `view` excludes the upcard and the
    /// pair cards split so far.
    fn split_pair(&self, card: CardValue, view: Deck, may_resplit: bool, shoe: &mut Deck, rng: &mut Xoshiro256PlusPlus, out: &mut Vec<(Hand, f64)>) -> Result<bool> {
        for _ in 0..2 {
            let Draw::Card(k) = draw(shoe, rng) else {
                return Ok(false);
            };
            let own = view.without(k)?;
            let hand = Hand::from_cards(&[card, k]);
            if may_resplit && k == card && own.can_deal_player() && self.decide(Spot::PairResplit(card, hand), &own)? == Action::Split {
                if !self.split_pair(card, own, false, shoe, rng, out)? {
                    return Ok(false);
                }
                continue;
            }
            match self.play_after_split(hand, own, shoe, rng)? {
                Some(result) => out.push(result),
                None => return Ok(false),
            }
        }
        Ok(true)
    }
}

fn settle(hand: Hand, bet: f64, dealer: DealerOutcome) -> f64 {
    if hand.is_bust() {
        return -bet;
    }
    if dealer == DealerOutcome::BUST {
        return bet;
    }
    match hand.total().cmp(&dealer.code()) {
        std::cmp::Ordering::Greater => bet,
        std::cmp::Ordering::Less => -bet,
        std::cmp::Ordering::Equal => 0.0,
    }
}

/// Play `n` independent rounds, each from a fresh copy of `deck`, with the
/// engine's decisions at `solver`'s depth.
pub fn simulate_round<M: Memo + Sync + ?Sized>(solver: &Solver<'_, M>, deck: &Deck, n: u64, seed: u64) -> Result<SimReport> {
    if !deck.is_infinite() && deck.total() < 4 {
        return Err(Error::InvalidArgument("a round needs at least four cards".into()));
    }
    let decisions = Decisions::default();
    let rules = *solver.rules();
    run_sharded(n, seed, |rng, tally| {
        let mut shoe = *deck;
        let up = shoe.draw(rng)?;
        let hole = shoe.draw(rng)?;
        let first = shoe.draw(rng)?;
        let second = shoe.draw(rng)?;
        let dealer_natural = up.is_natural_with(hole);
        let player_natural = first.is_natural_with(second);
        if dealer_natural || player_natural {
            let win = match (dealer_natural, player_natural) {
                (true, true) => 0.0,
                (true, false) => -1.0,
                _ => Rules::NATURAL_PAYOUT,
            };
            tally.record(format!("{win}"), win);
            return Ok(());
        }
        let player = Player {
            solver,
            decisions: &decisions,
            up,
        };
        let mut view = shoe;
        view.add(hole);
        let mut hands: Vec<(Hand, f64)> = Vec::with_capacity(4);
        let complete = match player.decide(Spot::Start(first, second), &view)? {
            Action::Stand => {
                hands.push((Hand::from_cards(&[first, second]), 1.0));
                true
            }
            Action::Double => match draw(&mut shoe, rng) {
                Draw::Card(k) => {
                    hands.push((Hand::from_cards(&[first, second, k]), 2.0));
                    true
                }
                Draw::Exhausted => false,
            },
            Action::Hit => match draw(&mut shoe, rng) {
                Draw::Card(k) => {
                    let mut v = view;
                    v.remove(k)?;
                    match player.hit_out(Hand::from_cards(&[first, second, k]), v, &mut shoe, rng)? {
                        Some(h) => {
                            hands.push((h, 1.0));
                            true
                        }
                        None => false,
                    }
                }
                Draw::Exhausted => false,
            },
            Action::Split if first.is_ace() => player.split_aces(view, rules.rsa, &mut shoe, rng, &mut hands)?,
            Action::Split => player.split_pair(first, view, rules.rsp, &mut shoe, rng, &mut hands)?,
        };
        if !complete {
            tally.aborted += 1;
            return Ok(());
        }
        let dealer_hand = Hand::from_card(up) + hole;
        let Some(outcome) = play_dealer(dealer_hand, false, &mut shoe, &rules, rng) else {
            tally.aborted += 1;
            return Ok(());
        };
        let win: f64 = hands.iter().map(|&(h, bet)| settle(h, bet, outcome)).sum();
        tally.record(format!("{win}"), win);
        Ok(())
    })
}
