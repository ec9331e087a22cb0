use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Data points fall outside the declared support interval.
    #[error("{} point(s) outside support [{a}, {b}] at indices {indices:?}", indices.len())]
    OutsideSupport { a: f64, b: f64, indices: Vec<usize> },

    /// The mixture density vanishes at some data point, so the likelihood is zero.
    #[error("infeasible model: {0}")]
    Infeasible(String),

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
