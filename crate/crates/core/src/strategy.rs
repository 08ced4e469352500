//! Expected win of each player option under the no-dealer-natural measure.
//!
//! Every expectation is in units of the original bet and is conditioned on
//! the dealer not holding a natural; naturals are settled by the caller.
//! Cards are drawn with the `Q` probabilities of [`Deck::probs_q`] and each
//! recursive step sees the deck without the drawn card.
//!
//! The player may only draw while at least two unseen cards remain (one of
//! them is the dealer's hole card). Options that need a card are
//! unavailable otherwise.

use serde::{Deserialize, Serialize};

use crate::card::CardValue;
use crate::dealer::{dealer_dist_q_memo, DealerDist};
use crate::deck::Deck;
use crate::error::{Error, Result};
use crate::hand::Hand;
use crate::memo::{HitKey, Memo, SharedMemo};
use crate::rules::Rules;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Stand,
    Hit,
    Double,
    Split,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Stand => "stand",
            Action::Hit => "hit",
            Action::Double => "double",
            Action::Split => "split",
        }
    }
}

impl std::fmt::Display for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Expected win of every legal option and the recommended one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ActionEvaluation {
    pub ev_stand: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ev_hit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ev_double: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ev_split: Option<f64>,
    pub best: Action,
}

impl ActionEvaluation {
    /// Pick the maximum; on equal values the earlier of stand, hit, double,
    /// split wins.
    pub fn new(
        ev_stand: f64,
        ev_hit: Option<f64>,
        ev_double: Option<f64>,
        ev_split: Option<f64>,
    ) -> ActionEvaluation {
        let mut best = (Action::Stand, ev_stand);
        for (action, ev) in [
            (Action::Hit, ev_hit),
            (Action::Double, ev_double),
            (Action::Split, ev_split),
        ] {
            if let Some(ev) = ev {
                if ev > best.1 {
                    best = (action, ev);
                }
            }
        }
        ActionEvaluation {
            ev_stand,
            ev_hit,
            ev_double,
            ev_split,
            best: best.0,
        }
    }

    pub fn ev(&self, action: Action) -> Option<f64> {
        match action {
            Action::Stand => Some(self.ev_stand),
            Action::Hit => self.ev_hit,
            Action::Double => self.ev_double,
            Action::Split => self.ev_split,
        }
    }

    pub fn best_ev(&self) -> f64 {
        self.ev(self.best).unwrap_or(self.ev_stand)
    }
}

/// Stand expectation against a conditioned dealer distribution.
pub fn stand_value(total: u8, q: &DealerDist) -> f64 {
    let probs = q.probs();
    let bust = probs[6];
    if total > 21 {
        return -1.0;
    }
    if total < 17 {
        return bust - probs[..5].iter().sum::<f64>();
    }
    let p = (total - 17) as usize;
    let below: f64 = probs[..p].iter().sum();
    let above: f64 = probs[p + 1..5].iter().sum();
    bust + below - above
}

/// Player-side expectations for one rule set, sharing a memo table.
///
/// `depth` bounds the number of further cards the hit recursion looks
/// ahead (13 covers every hand that can occur).
pub struct Solver<'m, M: Memo + ?Sized = SharedMemo> {
    rules: Rules,
    depth: u8,
    memo: &'m M,
}

impl<M: Memo + ?Sized> Clone for Solver<'_, M> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<M: Memo + ?Sized> Copy for Solver<'_, M> {}

impl<'m, M: Memo + ?Sized> Solver<'m, M> {
    pub const DEFAULT_DEPTH: u8 = 13;

    pub fn new(rules: Rules, memo: &'m M) -> Self {
        Solver {
            rules,
            depth: Self::DEFAULT_DEPTH,
            memo,
        }
    }

    pub fn with_depth(mut self, depth: u8) -> Self {
        self.depth = depth;
        self
    }

    pub fn rules(&self) -> &Rules {
        &self.rules
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    pub fn memo(&self) -> &'m M {
        self.memo
    }

    /// Dealer distribution given no natural, through the memo.
    pub fn dealer_q(&self, up: CardValue, deck: &Deck) -> Result<DealerDist> {
        dealer_dist_q_memo(up, deck, &self.rules, self.memo)
    }

    fn draws(&self, up: CardValue, deck: &Deck) -> Result<[f64; 10]> {
        if !deck.can_deal_player() {
            return Err(Error::EmptyDeck);
        }
        deck.probs_q(up)
    }

    pub fn ev_stand(&self, hand: Hand, up: CardValue, deck: &Deck) -> Result<f64> {
        if hand.is_bust() {
            return Ok(-1.0);
        }
        Ok(stand_value(hand.total(), &self.dealer_q(up, deck)?))
    }

    /// Double the bet and take exactly one card.
    pub fn ev_double(&self, hand: Hand, up: CardValue, deck: &Deck) -> Result<f64> {
        let q = self.draws(up, deck)?;
        let mut total = 0.0;
        for (idx, &p) in q.iter().enumerate() {
            if p > 0.0 {
                let k = CardValue::from_index(idx);
                total += p * self.ev_stand(hand + k, up, &deck.removed(k))?;
            }
        }
        Ok(2.0 * total)
    }

    /// Take one card, then continue optimally between standing and hitting.
    pub fn ev_hit(&self, hand: Hand, up: CardValue, deck: &Deck) -> Result<f64> {
        self.ev_hit_depth(hand, up, deck, self.depth)
    }

    /// [`Solver::ev_hit`] with an explicit look-ahead `rec`: after the
    /// first card at most `rec` further hits are considered.
    pub fn ev_hit_depth(&self, hand: Hand, up: CardValue, deck: &Deck, rec: u8) -> Result<f64> {
        let key = HitKey {
            up,
            hand,
            deck: *deck,
            rec,
            h17: self.rules.dealer_hits_soft17,
        };
        if let Some(ev) = self.memo.hit(&key) {
            return Ok(ev);
        }
        let q = self.draws(up, deck)?;
        let mut total = 0.0;
        for (idx, &p) in q.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let k = CardValue::from_index(idx);
            let next = hand + k;
            let rest = deck.removed(k);
            let stand = self.ev_stand(next, up, &rest)?;
            total += p * if next.total() >= 21 || rec == 0 || !rest.can_deal_player() {
                stand
            } else {
                stand.max(self.ev_hit_depth(next, up, &rest, rec - 1)?)
            };
        }
        self.memo.store_hit(key, total);
        Ok(total)
    }

    /// Split a pair of aces; each ace receives one card. `rsa_active`
    /// allows one more split when the first card dealt is another ace.
    /// `deck` excludes both aces.
    pub fn ev_split_aces(&self, up: CardValue, deck: &Deck, rsa_active: bool) -> Result<f64> {
        let q = self.draws(up, deck)?;
        let ace = Hand::from_card(CardValue::ACE);
        let mut total = 0.0;
        for (idx, &p) in q.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let k = CardValue::from_index(idx);
            let rest = deck.removed(k);
            let stand = self.ev_stand(ace + k, up, &rest)?;
            total += p * if rsa_active && k.is_ace() && rest.can_deal_player() {
                stand.max(self.ev_split_aces(up, &rest, false)?)
            } else {
                stand
            };
        }
        Ok(2.0 * total)
    }

    /// Split a non-ace pair of `card`s; both hands are valued as one hand
    /// played on the same deck. `deck` excludes both pair cards.
    pub fn ev_split(&self, card: CardValue, up: CardValue, deck: &Deck, rsp_active: bool) -> Result<f64> {
        if card.is_ace() {
            return Err(Error::InvalidArgument("use ev_split_aces for a pair of aces".into()));
        }
        let q = self.draws(up, deck)?;
        let start = Hand::from_card(card);
        let mut total = 0.0;
        for (idx, &p) in q.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let k = CardValue::from_index(idx);
            let rest = deck.removed(k);
            let play = self.ev_no_split(start + k, up, &rest)?;
            total += p * if rsp_active && k == card && rest.can_deal_player() {
                play.max(self.ev_split(card, up, &rest, false)?)
            } else {
                play
            };
        }
        Ok(2.0 * total)
    }

    /// Best of stand, hit and (with das) double for a hand produced by a
    /// split.
    pub fn ev_no_split(&self, hand: Hand, up: CardValue, deck: &Deck) -> Result<f64> {
        let stand = self.ev_stand(hand, up, deck)?;
        if hand.total() >= 21 || !deck.can_deal_player() {
            return Ok(stand);
        }
        let mut best = stand.max(self.ev_hit(hand, up, deck)?);
        if self.rules.das {
            best = best.max(self.ev_double(hand, up, deck)?);
        }
        Ok(best)
    }

    /// Evaluate every legal option for the first two cards. `deck`
    /// excludes both cards and the upcard.
    pub fn best_action(
        &self,
        first: CardValue,
        second: CardValue,
        up: CardValue,
        deck: &Deck,
    ) -> Result<ActionEvaluation> {
        if first.is_natural_with(second) {
            return Err(Error::InvalidArgument("a natural has no decision to make".into()));
        }
        let hand = Hand::from_cards(&[first, second]);
        let ev_stand = self.ev_stand(hand, up, deck)?;
        if !deck.can_deal_player() {
            return Ok(ActionEvaluation::new(ev_stand, None, None, None));
        }
        let ev_hit = self.ev_hit(hand, up, deck)?;
        let ev_double = self.ev_double(hand, up, deck)?;
        let ev_split = if first != second {
            None
        } else if first.is_ace() {
            Some(self.ev_split_aces(up, deck, self.rules.rsa)?)
        } else {
            Some(self.ev_split(first, up, deck, self.rules.rsp)?)
        };
        Ok(ActionEvaluation::new(ev_stand, Some(ev_hit), Some(ev_double), ev_split))
    }

    /// Evaluate a hand of any length: two cards get every option, longer
    /// hands choose between standing and hitting.
    pub fn evaluate_hand(&self, cards: &[CardValue], up: CardValue, deck: &Deck) -> Result<ActionEvaluation> {
        match cards {
            [] | [_] => Err(Error::InvalidArgument("a hand needs at least two cards".into())),
            &[first, second] => self.best_action(first, second, up, deck),
            _ => {
                let hand = Hand::from_cards(cards);
                let ev_stand = self.ev_stand(hand, up, deck)?;
                let ev_hit = if hand.is_bust() || !deck.can_deal_player() {
                    None
                } else {
                    Some(self.ev_hit(hand, up, deck)?)
                };
                Ok(ActionEvaluation::new(ev_stand, ev_hit, None, None))
            }
        }
    }
}
