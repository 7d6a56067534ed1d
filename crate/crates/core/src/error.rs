use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument out of domain in {routine}: {detail}")]
    Domain { routine: &'static str, detail: String },

    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence { routine: &'static str, iterations: usize },

    #[error("series diverges or overflows in {routine} (term {term})")]
    SeriesDivergence { routine: &'static str, term: usize },

    #[error("Fermi order s = {0} is not supported on this path")]
    UnsupportedOrder(f64),

    #[error("time step {dt} exceeds stability limit {limit}")]
    Stability { dt: f64, limit: f64 },

    #[error("invariant violated at cell {cell}: {detail}")]
    Invariant { cell: usize, detail: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            routine,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
