use thiserror::Error;

/// Errors raised by the otlab computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |M - M†| entry {0:e})")]
    NonHermitianInput(f64),

    #[error("matrix has a negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("invalid density operator: {0}")]
    InvalidDensityOperator(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("infeasible overlaps: {0}")]
    InfeasibleOverlaps(String),

    #[error("invalid Gram spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("family parameter {0} outside [0, 1]")]
    ParamOutOfRange(f64),

    #[error("invalid priors: {0}")]
    InvalidPriors(String),

    #[error("{name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),

    #[error("no frontier points to verify")]
    EmptyInput,

    #[error("number of trials must be at least 1")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, Error>;
