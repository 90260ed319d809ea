use thiserror::Error;

/// Errors raised by distribution constructors and operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("truncation overflow: tail mass {tail:e} still above {epsilon:e} at max_support = {max_support}")]
    TruncationOverflow {
        max_support: usize,
        epsilon: f64,
        tail: f64,
    },

    #[error("{op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("{op}: support is not an interval of strictly positive masses")]
    NotIntervalSupported { op: &'static str },

    #[error("mean mismatch: expected {expected}, measured {measured}")]
    MeanMismatch { expected: f64, measured: f64 },

    #[error("sampler could not bracket the tilt parameter for mean {target}: {detail}")]
    Sampler { target: f64, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
