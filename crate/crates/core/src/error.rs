use thiserror::Error;

/// Errors raised while validating inputs or evaluating distributions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parity mismatch: total {total} and difference {delta} must have equal parity")]
    ParityMismatch { total: u32, delta: i64 },

    #[error("{what} out of range: {detail}")]
    Range { what: &'static str, detail: String },

    #[error("delta_out = {delta_out} is not on the lattice of total {total}")]
    Lattice { total: u32, delta_out: i64 },

    #[error("exact rational mode requires a rational {0}")]
    Mode(&'static str),

    #[error("invalid Wigner indices: {0}")]
    Domain(String),

    #[error("degenerate visibility: {0}")]
    Degenerate(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("distribution is not normalized: total mass {mass} (tolerance {tolerance})")]
    Normalization { mass: f64, tolerance: f64 },

    #[error("negative probability {value} at {at}")]
    Negative { value: f64, at: String },

    #[error("probability {mass} found off the parity lattice of a lossless run")]
    ParityViolation { mass: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn range(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Range {
            what,
            detail: detail.into(),
        }
    }
}
