use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (max |A - A^dag| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid POVM: min effect eigenvalue {min_eigenvalue:e}, completeness residual {completeness_residual:e}")]
    InvalidPovm {
        min_eigenvalue: f64,
        completeness_residual: f64,
    },

    #[error("POVM is not informationally complete (frame condition number {condition_number:e})")]
    NotInformationallyComplete { condition_number: f64 },

    #[error("Bloch frame matrix W is singular (condition number {condition_number:e})")]
    SingularW { condition_number: f64 },

    #[error("invalid Bloch POVM: {0}")]
    InvalidBlochPovm(String),

    #[error("frequencies must sum to 1 (got {sum})")]
    FrequencySum { sum: f64 },

    #[error("effect {index} has trace/epsilon = {ratio}, which is not a positive integer")]
    NonIntegerSplit { index: usize, ratio: f64 },

    #[error("random POVM needs at least 4 effects to be informationally complete (got {0})")]
    TooFewEffects(usize),

    #[error("Kraus operators are not trace preserving (residual {residual:e})")]
    NotTracePreserving { residual: f64 },

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("invalid Choi state: {0}")]
    InvalidChoi(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("observable family is empty")]
    EmptyFamily,

    #[error("probability vector is not normalized (sum {sum})")]
    UnnormalizedDistribution { sum: f64 },

    #[error("{len} shot values cannot be split into {k} equal batches")]
    NotDivisible { len: usize, k: usize },

    #[error("entangled block of {size} qubits exceeds the dense limit of {max}")]
    BlockTooLarge { size: usize, max: usize },

    #[error("invalid separability structure: {0}")]
    InvalidStructure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
