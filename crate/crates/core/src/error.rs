use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A card of this value was requested but none is left.
    #[error("no card of value {0} left in the deck")]
    EmptyRank(u8),

    #[error("the deck is empty")]
    EmptyDeck,

    /// Conditioning on "dealer has no natural" is impossible because the
    /// natural is certain.
    #[error("degenerate condition: dealer natural is certain")]
    DegenerateCondition,
}

pub type Result<T> = std::result::Result<T, Error>;
