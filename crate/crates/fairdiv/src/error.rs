//! Error types shared across the engine.

use thiserror::Error;

/// Every failure mode of the library.
///
/// Variants split into two families: *hypothesis violations* (the input does
/// not satisfy the assumptions of the requested algorithm — a user error) and
/// *internal breaches* (an invariant the algorithms guarantee failed to hold —
/// a bug or a theorem-contradicting input worth reporting).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value: {0}")]
    InvalidValue(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("unknown item index {item} (instance has {m} items)")]
    InvalidItem { item: usize, m: usize },

    #[error("cancelability check requires m <= {max} items, got {m}")]
    TooLargeForExhaustiveCheck { m: usize, max: usize },

    #[error("operation requires additive valuations; agent {agent} has {kind}")]
    UnsupportedValuation { agent: usize, kind: &'static str },

    #[error("no common top-{l} set: {reason}")]
    NotCommon { l: usize, reason: String },

    #[error("agents do not share a common order over the top-{l} items: {reason}")]
    NotCommonOrder { l: usize, reason: String },

    #[error("top-{l} values are not within a [x, 2x] interval: {reason}")]
    NotBoundedInterval { l: usize, reason: String },

    #[error("favorite items are not strict and distinct: {reason}")]
    NotDistinctFavorites { reason: String },

    #[error("top tiers are not strict and pairwise disjoint: {reason}")]
    NotDistinctTiers { reason: String },

    #[error("hypothesis violation: {0}")]
    HypothesisViolation(String),

    #[error("infeasible generator parameters: {0}")]
    InfeasibleParams(String),

    #[error("enumeration too large: {states} states exceed the 10^8 guard")]
    TooLarge { states: u128 },

    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),

    #[error("unknown generator family {0:?}")]
    UnknownFamily(String),

    #[error("tier extension not found; state dump: {dump}")]
    TierExtensionNotFound { dump: String },

    #[error("builder postcondition failed: {0}")]
    BuilderPostconditionFailed(String),

    #[error("internal invariant breach: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// CLI exit code for this error: 2 for user/hypothesis errors, 3 for
    /// internal invariant breaches.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::TierExtensionNotFound { .. }
            | Error::BuilderPostconditionFailed(_)
            | Error::Internal(_) => 3,
            _ => 2,
        }
    }

    /// True when the error reports an unmet algorithm hypothesis rather than
    /// malformed input; `bench` marks such runs as inapplicable.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::UnsupportedValuation { .. }
                | Error::NotCommon { .. }
                | Error::NotCommonOrder { .. }
                | Error::NotBoundedInterval { .. }
                | Error::NotDistinctFavorites { .. }
                | Error::NotDistinctTiers { .. }
                | Error::HypothesisViolation(_)
                | Error::TooLargeForExhaustiveCheck { .. }
                | Error::TooLarge { .. }
        )
    }
}
