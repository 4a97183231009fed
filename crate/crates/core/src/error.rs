use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("improper transfer function")]
    ImproperTransferFunction,
    #[error("invalid transfer function: {0}")]
    InvalidTransferFunction(String),
    #[error("SISO only")]
    SisoOnly,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invariant zeros need a square system (p = m), got p = {outputs}, m = {inputs}")]
    NonSquare { outputs: usize, inputs: usize },
    #[error("zeros ill-defined on non-minimal realization")]
    NonMinimal,
    #[error("unsupported zero structure: {0}")]
    UnsupportedZeroStructure(String),
    #[error("evaluation at pole")]
    EvaluationAtPole,
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("controller does not stabilize plant")]
    UnstableClosedLoop,
    #[error("cipher plant is not internally stable")]
    UnstableCipher,
    #[error("horizon of {0} steps exceeded")]
    HorizonExceeded(usize),
    #[error("input not persistently exciting")]
    NotPersistentlyExciting,
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid model structure: {0}")]
    InvalidStructure(String),
    #[error("model has no invariant zeros")]
    NoZeros,
    #[error("zero index {index} out of range ({count} zeros)")]
    ZeroIndexOutOfRange { index: usize, count: usize },
    #[error("pole-zero cancellation: zero direction ill-conditioned")]
    PoleZeroCancellation,
    #[error("unreliable Monte Carlo: {failed} of {total} replicates failed")]
    UnreliableMonteCarlo { failed: usize, total: usize },
    #[error("singular expression: {0}")]
    Singular(String),
    #[error("non-finite integrand at omega = {0}")]
    NonFiniteIntegrand(f64),
    #[error("controller design failed: {0}")]
    Design(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
