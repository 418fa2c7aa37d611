use alloc::string::String;

use crate::model::DayType;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Computation errors raised by the analytics and generator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("no PT chains")]
    NoPtChains,
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("insufficient support: {distinct} distinct values, need at least 3")]
    InsufficientSupport { distinct: usize },
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
    #[error("too few points: {n}, need at least {min}")]
    TooFewPoints { n: usize, min: usize },
    #[error("no {0} days in dataset")]
    NoDaysOfType(DayType),
    #[error("total cell count is zero")]
    ZeroTotalCells,
    #[error("duplicate stop id {0:?}")]
    DuplicateStopId(String),
    #[error("invalid coordinates for stop {0:?}")]
    InvalidCoordinates(String),
    #[error("degenerate extent (zero area)")]
    DegenerateExtent,
    #[error("a line needs at least 2 stops, network has {stops}")]
    LineNeedsTwoStops { stops: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
