use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid multigraph edge ({0}, {1})")]
    InvalidEdge(usize, usize),

    #[error("graph is not block structured: sub-block ({0}, {1}) is neither full nor empty")]
    NotBlockStructured(usize, usize),

    #[error("edge inclusion probability must lie in (0, 1), got {0}")]
    InvalidTheta(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("({0}, {1}) is not a free element of the graph")]
    NotFreeElement(usize, usize),

    #[error("missing free element ({0}, {1})")]
    MissingFreeElement(usize, usize),

    #[error("non-positive diagonal entry at position {0}")]
    NonPositiveDiagonal(usize),

    #[error("exact sampler did not converge after {sweeps} sweeps (last change {last_change:e})")]
    NoConvergence { sweeps: usize, last_change: f64 },

    #[error("graph is not decomposable")]
    NotDecomposable,

    #[error("non-finite acceptance ratio at iteration {iteration}: {detail}")]
    NumericalOverflow { iteration: usize, detail: String },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty sample list")]
    EmptySampleList,

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite
                | Error::NonPositiveDiagonal(_)
                | Error::NoConvergence { .. }
                | Error::NumericalOverflow { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
