use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Face value of a card: 1 is an ace, 10 is a ten or any face card.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct CardValue(u8);

impl CardValue {
    pub const ACE: CardValue = CardValue(1);
    pub const TEN: CardValue = CardValue(10);

    /// All ten values, ace first.
    pub const ALL: [CardValue; 10] = [
        CardValue(1),
        CardValue(2),
        CardValue(3),
        CardValue(4),
        CardValue(5),
        CardValue(6),
        CardValue(7),
        CardValue(8),
        CardValue(9),
        CardValue(10),
    ];

    pub fn new(value: u8) -> Result<CardValue> {
        if (1..=10).contains(&value) {
            Ok(CardValue(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "card value must be in 1..=10, got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> u8 {
        self.0
    }

    /// Zero-based slot in a count array (ace at 0, ten at 9).
    #[inline]
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    #[inline]
    pub fn from_index(index: usize) -> CardValue {
        debug_assert!(index < 10);
        CardValue(index as u8 + 1)
    }

    #[inline]
    pub fn is_ace(self) -> bool {
        self.0 == 1
    }

    /// True when `self` and `other` form a natural (ace and ten).
    pub fn is_natural_with(self, other: CardValue) -> bool {
        (self.0 == 1 && other.0 == 10) || (self.0 == 10 && other.0 == 1)
    }

    /// The card that completes a natural with this upcard, if any.
    pub fn natural_partner(self) -> Option<CardValue> {
        match self.0 {
            1 => Some(CardValue::TEN),
            10 => Some(CardValue::ACE),
            _ => None,
        }
    }
}

impl TryFrom<u8> for CardValue {
    type Error = Error;

    fn try_from(value: u8) -> Result<CardValue> {
        CardValue::new(value)
    }
}

impl From<CardValue> for u8 {
    fn from(card: CardValue) -> u8 {
        card.0
    }
}

impl fmt::Display for CardValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parse a comma separated list such as `1,1,2,10`.
pub fn parse_card_list(s: &str) -> Result<Vec<CardValue>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u8>()
                .map_err(|_| Error::InvalidArgument(format!("not a card value: {t:?}")))
                .and_then(CardValue::new)
        })
        .collect()
}
