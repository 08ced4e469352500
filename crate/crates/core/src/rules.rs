use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hand::Hand;

/// Table rules that change the game's expectation.
///
/// The three split options are usually written as a bit string in the
/// order das, rsa, rsp: `"010"` allows re-splitting aces only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Rules {
    /// Dealer hits soft 17 (H17) instead of standing (S17).
    pub dealer_hits_soft17: bool,
    /// Double down after a split.
    pub das: bool,
    /// Re-split aces.
    pub rsa: bool,
    /// Re-split non-ace pairs.
    pub rsp: bool,
}

impl Default for Rules {
    fn default() -> Self {
        Rules {
            dealer_hits_soft17: false,
            das: true,
            rsa: true,
            rsp: true,
        }
    }
}

impl Rules {
    /// A natural pays 3 to 2.
    pub const NATURAL_PAYOUT: f64 = 1.5;

    /// Parse a das/rsa/rsp bit string such as `"111"`. The dealer stands
    /// on soft 17.
    pub fn from_bits(bits: &str) -> Result<Rules> {
        let flags: Vec<bool> = bits
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(()),
            })
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("rules must be three 0/1 digits, got {bits:?}")))?;
        match flags[..] {
            [das, rsa, rsp] => Ok(Rules {
                dealer_hits_soft17: false,
                das,
                rsa,
                rsp,
            }),
            _ => Err(Error::InvalidArgument(format!(
                "rules must be three 0/1 digits, got {bits:?}"
            ))),
        }
    }

    pub fn with_h17(mut self, hits_soft17: bool) -> Rules {
        self.dealer_hits_soft17 = hits_soft17;
        self
    }

    pub fn bits(&self) -> String {
        [self.das, self.rsa, self.rsp]
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    /// Highest soft total on which the dealer still draws.
    #[inline]
    pub fn dealer_soft_hit_max(&self) -> u8 {
        if self.dealer_hits_soft17 {
            17
        } else {
            16
        }
    }

    /// True when the dealer must draw to `hand`.
    #[inline]
    pub fn dealer_hits(&self, hand: Hand) -> bool {
        if hand.is_soft() {
            hand.total() <= self.dealer_soft_hit_max()
        } else {
            hand.total() <= 16
        }
    }

    /// The eight das/rsa/rsp combinations in bit-string order 000..111.
    pub fn all_split_variants() -> impl Iterator<Item = Rules> {
        (0..8u8).map(|m| Rules {
            dealer_hits_soft17: false,
            das: m & 4 != 0,
            rsa: m & 2 != 0,
            rsp: m & 1 != 0,
        })
    }
}
