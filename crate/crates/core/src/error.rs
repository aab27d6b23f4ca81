use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    /// The truncated Fock space drops more probability than allowed.
    #[error("truncation insufficient for {what}: tail mass {tail:e} at cutoff {cutoff}, need cutoff >= {required}")]
    TruncationInsufficient {
        what: String,
        cutoff: usize,
        required: usize,
        tail: f64,
    },

    #[error("excitation leakage {population:e} exceeds {limit:e}")]
    Leakage { population: f64, limit: f64 },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("density matrix trace deviates from 1 by {0:e}")]
    BadTrace(f64),

    #[error("state norm deviates from 1 by {0:e}")]
    BadNorm(f64),

    #[error("eigenvalue {0:e} is below the positivity tolerance")]
    NotPositive(f64),

    #[error("eigenvalue has imaginary part {0:e}")]
    ComplexEigenvalue(f64),

    /// The operator couples different excitation sectors.
    #[error("operator does not commute with the excitation number (max coupling {0:e})")]
    BlockStructure(f64),

    #[error("eigen-decomposition failed: {0}")]
    Decomposition(String),

    #[error("ambiguous threshold, sampled labels: {0}")]
    AmbiguousThreshold(String),
}
