//! Composition of the unseen cards and single-card probabilities.
//!
//! A [`Deck`] is always the player's view of the unseen cards: the dealer's
//! upcard and every player card are removed, while the dealer's hole card is
//! still counted as part of the deck.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::card::CardValue;
use crate::error::{Error, Result};

/// Unseen cards as ten counts, ace first. The infinite variant draws every
/// value with a fixed probability (1/13, or 4/13 for tens).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DeckRepr", into = "DeckRepr")]
pub struct Deck {
    counts: [u16; 10],
    total: u32,
    infinite: bool,
}

const INFINITE_WEIGHTS: [u16; 10] = [1, 1, 1, 1, 1, 1, 1, 1, 1, 4];

impl Deck {
    /// `n_decks` standard 52-card decks.
    pub fn new(n_decks: u32) -> Result<Deck> {
        if n_decks == 0 {
            return Err(Error::InvalidArgument("number of decks must be at least 1".into()));
        }
        let n = u16::try_from(n_decks)
            .ok()
            .filter(|n| *n <= u16::MAX / 16)
            .ok_or_else(|| Error::InvalidArgument(format!("too many decks: {n_decks}")))?;
        let mut counts = [4 * n; 10];
        counts[9] = 16 * n;
        Ok(Deck::from_counts(counts))
    }

    pub fn infinite() -> Deck {
        Deck {
            counts: INFINITE_WEIGHTS,
            total: 13,
            infinite: true,
        }
    }

    pub fn from_counts(counts: [u16; 10]) -> Deck {
        Deck {
            counts,
            total: counts.iter().map(|&c| c as u32).sum(),
            infinite: false,
        }
    }

    #[inline]
    pub fn is_infinite(&self) -> bool {
        self.infinite
    }

    /// Counts `(a1, ..., a10)`; `None` for the infinite deck.
    pub fn counts(&self) -> Option<[u16; 10]> {
        (!self.infinite).then_some(self.counts)
    }

    /// Number of cards of value `k`. For the infinite deck these are the
    /// relative weights 1 (or 4 for tens).
    #[inline]
    pub fn count(&self, k: CardValue) -> u16 {
        self.counts[k.index()]
    }

    /// Number of unseen cards, 13 for the infinite deck.
    #[inline]
    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        !self.infinite && self.total == 0
    }

    /// True when at least one card besides the dealer's hole card is left,
    /// so the player can be dealt another card.
    #[inline]
    pub fn can_deal_player(&self) -> bool {
        self.infinite || self.total >= 2
    }

    pub fn remove(&mut self, k: CardValue) -> Result<()> {
        if self.infinite {
            return Ok(());
        }
        let slot = &mut self.counts[k.index()];
        if *slot == 0 {
            return Err(Error::EmptyRank(k.value()));
        }
        *slot -= 1;
        self.total -= 1;
        Ok(())
    }

    pub fn add(&mut self, k: CardValue) {
        if self.infinite {
            return;
        }
        self.counts[k.index()] += 1;
        self.total += 1;
    }

    /// Copy of the deck with one card of value `k` removed.
    pub fn without(&self, k: CardValue) -> Result<Deck> {
        let mut deck = *self;
        deck.remove(k)?;
        Ok(deck)
    }

    /// Copy with every card in `cards` removed.
    pub fn without_all(&self, cards: &[CardValue]) -> Result<Deck> {
        let mut deck = *self;
        for &k in cards {
            deck.remove(k)?;
        }
        Ok(deck)
    }

    /// Removal that the caller has already proven legal (positive
    /// probability of drawing `k`).
    #[inline]
    pub(crate) fn removed(&self, k: CardValue) -> Deck {
        let mut deck = *self;
        if !deck.infinite {
            debug_assert!(deck.counts[k.index()] > 0);
            deck.counts[k.index()] -= 1;
            deck.total -= 1;
        }
        deck
    }

    /// Probability that the next card is `k`, unconditioned.
    pub fn prob_p(&self, k: CardValue) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyDeck);
        }
        Ok(self.count(k) as f64 / self.total as f64)
    }

    /// All ten unconditioned probabilities; all zero for an empty deck.
    #[inline]
    pub(crate) fn probs_p(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        if self.total == 0 {
            return out;
        }
        let t = self.total as f64;
        for (p, &a) in out.iter_mut().zip(&self.counts) {
            *p = a as f64 / t;
        }
        out
    }

    /// Probability that the next card is `k` given that the dealer, showing
    /// `up`, does not hold a natural.
    pub fn prob_q(&self, k: CardValue, up: CardValue) -> Result<f64> {
        Ok(self.probs_q(up)?[k.index()])
    }

    /// All ten conditioned probabilities for upcard `up`.
    ///
    /// With a ten up the hole card is known not to be an ace, so with
    /// `t` cards and `a1` aces: `Q[1] = a1/(t-1)` and
    /// `Q[k] = ak/(t-1) * (t-a1-1)/(t-a1)` otherwise. An ace up is the
    /// mirror image with tens. Any other upcard leaves the probabilities
    /// unchanged.
    pub fn probs_q(&self, up: CardValue) -> Result<[f64; 10]> {
        let partner = match up.natural_partner() {
            Some(partner) if !self.infinite => partner,
            _ => {
                if self.is_empty() {
                    return Err(Error::EmptyDeck);
                }
                return Ok(self.probs_p());
            }
        };
        let t = self.total;
        if t < 2 {
            return Err(Error::EmptyDeck);
        }
        let a_partner = self.count(partner) as u32;
        let others = t - a_partner;
        if others == 0 {
            return Err(Error::DegenerateCondition);
        }
        let tm1 = (t - 1) as f64;
        let keep = (others - 1) as f64 / others as f64;
        let mut out = [0.0; 10];
        for (i, p) in out.iter_mut().enumerate() {
            let a = self.counts[i] as f64;
            *p = if i == partner.index() {
                a / tm1
            } else {
                a / tm1 * keep
            };
        }
        Ok(out)
    }

    /// Draw one card at random, proportionally to the counts.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<CardValue> {
        if self.is_empty() {
            return Err(Error::EmptyDeck);
        }
        let mut u = rng.random_range(0..self.total);
        for (i, &a) in self.counts.iter().enumerate() {
            let a = a as u32;
            if u < a {
                let card = CardValue::from_index(i);
                self.remove(card)?;
                return Ok(card);
            }
            u -= a;
        }
        unreachable!("draw index exceeded deck total")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
enum DeckRepr {
    Finite { counts: [u16; 10] },
    Infinite,
}

impl TryFrom<DeckRepr> for Deck {
    type Error = Error;

    fn try_from(repr: DeckRepr) -> Result<Deck> {
        Ok(match repr {
            DeckRepr::Finite { counts } => Deck::from_counts(counts),
            DeckRepr::Infinite => Deck::infinite(),
        })
    }
}

impl From<Deck> for DeckRepr {
    fn from(deck: Deck) -> DeckRepr {
        match deck.counts() {
            Some(counts) => DeckRepr::Finite { counts },
            None => DeckRepr::Infinite,
        }
    }
}
