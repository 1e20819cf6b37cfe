//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A zero vector cannot be normalized.
    #[error("cannot normalize a zero vector")]
    ZeroVector,

    /// Two antenna elements coincide, so a line-of-sight entry is undefined.
    #[error("degenerate geometry: TX element {tx} and RX element {rx} coincide")]
    DegenerateGeometry { tx: usize, rx: usize },

    /// Matrix/vector dimensions are inconsistent.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The objective or a gradient produced a non-finite value.
    #[error("{what} is non-finite at iteration {iteration}")]
    NonFinite {
        what: &'static str,
        iteration: usize,
    },

    /// A statistic was requested on an empty sample set.
    #[error("empty sample set")]
    EmptySamples,

    /// Rate gain is undefined when the baseline mean rate is not positive.
    #[error("rate gain undefined: baseline mean rate {0} is not positive")]
    ZeroBaseline(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A Monte Carlo trial failed; carries the sweep point and trial index.
    #[error("trial {trial} at sweep point {sweep} failed: {source}")]
    TrialFailed {
        sweep: f64,
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
