use std::cmp::Ordering;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

use crate::card::CardValue;
use crate::error::{Error, Result};

/// Best blackjack total of a set of cards and whether an ace is counted as
/// eleven. The card list itself is not kept.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hand {
    total: u8,
    soft: bool,
}

impl Hand {
    pub const EMPTY: Hand = Hand {
        total: 0,
        soft: false,
    };

    /// Validated constructor. A soft total must lie in 11..=21; 11 is only
    /// reachable by a lone ace.
    pub fn new(total: u8, soft: bool) -> Result<Hand> {
        if soft && !(11..=21).contains(&total) {
            return Err(Error::InvalidArgument(format!("soft total {total} is impossible")));
        }
        Ok(Hand { total, soft })
    }

    pub const fn hard(total: u8) -> Hand {
        Hand { total, soft: false }
    }

    pub fn from_card(k: CardValue) -> Hand {
        Hand::EMPTY + k
    }

    pub fn from_cards(cards: &[CardValue]) -> Hand {
        cards.iter().fold(Hand::EMPTY, |h, &k| h + k)
    }

    #[inline]
    pub fn total(self) -> u8 {
        self.total
    }

    #[inline]
    pub fn is_soft(self) -> bool {
        self.soft
    }

    #[inline]
    pub fn is_bust(self) -> bool {
        self.total > 21
    }

    /// Compare the best total with `n`.
    pub fn compare(self, n: u8) -> Ordering {
        self.total.cmp(&n)
    }

    #[inline]
    pub fn add_card(self, k: CardValue) -> Hand {
        let (mut total, mut soft) = if k.is_ace() && self.total + 11 <= 21 {
            (self.total + 11, true)
        } else {
            (self.total + k.value(), self.soft)
        };
        if total > 21 && soft {
            total -= 10;
            soft = false;
        }
        Hand { total, soft }
    }
}

impl Add<CardValue> for Hand {
    type Output = Hand;

    #[inline]
    fn add(self, k: CardValue) -> Hand {
        self.add_card(k)
    }
}

impl AddAssign<CardValue> for Hand {
    fn add_assign(&mut self, k: CardValue) {
        *self = self.add_card(k);
    }
}

impl std::fmt::Display for Hand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.total, if self.soft { "s" } else { "h" })
    }
}
