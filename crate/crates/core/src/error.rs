use thiserror::Error;

pub type Result<T> = std::result::Result<T, CqeError>;

#[derive(Debug, Error)]
pub enum CqeError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("qubit count {0} exceeds the 64-qubit word width")]
    TooManyQubits(usize),

    #[error("mask bits set beyond qubit {n_qubits}")]
    MaskOutOfRange { n_qubits: usize },

    #[error("index {index} out of range for {limit} modes")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("degenerate pair ({0}, {0}): a†_i a†_i a_i a_i vanishes identically")]
    DegeneratePair(usize),

    #[error("operator is not Hermitian (largest imaginary coefficient {0:e})")]
    NotHermitian(f64),

    #[error("operator is not anti-Hermitian (largest real coefficient {0:e})")]
    NotAntiHermitian(f64),

    #[error("Pauli exponent requires a Hermitian string (phase ±1), got phase {0}")]
    NonHermitianString(String),

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid Pauli string {0:?}")]
    PauliParse(String),

    #[error("FCIDUMP line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("FCIDUMP header is missing key {0}")]
    MissingHeaderKey(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("sector ({n_alpha}, {n_beta}) does not fit in {n_spatial} spatial orbitals")]
    SectorTooLarge {
        n_alpha: usize,
        n_beta: usize,
        n_spatial: usize,
    },

    #[error("sector is empty")]
    EmptySector,

    #[error("dense problem too large: {0} qubits")]
    TooLarge(usize),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("non-finite energy at iteration {iteration}")]
    NonFiniteEnergy {
        iteration: usize,
        trace: Box<crate::solver::CqeTrace>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
