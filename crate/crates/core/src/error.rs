use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {dim} for factor `{label}`: {reason}")]
    InvalidDimension {
        label: String,
        dim: usize,
        reason: &'static str,
    },
    #[error("duplicate factor label `{0}`")]
    DuplicateLabel(String),
    #[error("factor `{label}` declared with inconsistent shapes ({left} vs {right})")]
    FactorClash {
        label: String,
        left: String,
        right: String,
    },
    #[error("cannot embed: factor `{0}` does not occur in the target space")]
    Embedding(String),
    #[error("space mismatch: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },
    #[error("matrix shape {rows}x{cols} does not match space dimension {dim}")]
    Shape { rows: usize, cols: usize, dim: usize },
    #[error("ordering undefined: operator is not Hermitian (residual {residual:.3e})")]
    OrderingUndefined { residual: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("scattering matrix is not unitary (residual {residual:.3e})")]
    NonUnitary { residual: f64 },
    #[error("Hamiltonian is not Hermitian (residual {residual:.3e})")]
    NonHermitianHamiltonian { residual: f64 },
    #[error("channel count mismatch: {left} vs {right}")]
    ChannelMismatch { left: usize, right: usize },
    #[error("invalid channel partition ({n1}, {n2}) for a {n}-channel system")]
    Partition { n1: usize, n2: usize, n: usize },
    #[error("ill-posed feedback loop: I - {block} is singular (min singular value {min_singular:.3e})")]
    IllPosedLoop { block: String, min_singular: f64 },
    #[error("inconsistent direct coupling: {0}")]
    InconsistentCoupling(String),
    #[error("storage function is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("supply rate is not Hermitian (residual {residual:.3e})")]
    NonHermitianSupply { residual: f64 },
    #[error("malformed exosystem class: {0}")]
    MalformedClass(String),
    #[error("function is not quadratic in the amplitudes (residual {residual:.3e})")]
    NotQuadratic { residual: f64 },
    #[error("observable dynamics are not linear in (I, q, p) (residual {residual:.3e})")]
    NotLinear { residual: f64 },
    #[error("step size too large: density matrix lost positivity (min eigenvalue {min_eigenvalue:.3e} at t={time})")]
    StepSize { min_eigenvalue: f64, time: f64 },
    #[error("decay fit undefined: {0}")]
    FitUndefined(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
