//! Exact expected values for blackjack over arbitrary deck compositions.
//!
//! The engine works on the player's view of the unseen cards ([`Deck`]):
//! the dealer's upcard and the player's cards are removed, the dealer's hole
//! card is not. Dealer outcome distributions live in [`dealer`], per-action
//! expectations in [`strategy`], whole-game expectation and removal effects
//! in [`expectation`], and a Monte Carlo cross-check in [`simulator`].

pub mod card;
pub mod dealer;
pub mod deck;
pub mod error;
pub mod expectation;
pub mod hand;
pub mod memo;
pub mod rules;
pub mod simulator;
pub mod strategy;

pub use card::{parse_card_list, CardValue};
pub use dealer::{DealerDist, DealerOutcome, Measure};
pub use deck::Deck;
pub use error::{Error, Result};
pub use expectation::{GameExpectation, RemovalEffects, RemovalTable};
pub use hand::Hand;
pub use memo::{LocalMemo, Memo, SharedMemo};
pub use rules::Rules;
pub use simulator::{simulate_dealer, simulate_round, SimReport};
pub use strategy::{Action, ActionEvaluation, Solver};
