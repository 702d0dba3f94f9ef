use thiserror::Error;

/// Errors raised by the evaluation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CapError {
    #[error("dimension mismatch: expected {expected} states, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid state space: {0}")]
    InvalidStates(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("belief set has no vertices")]
    EmptyBeliefSet,

    #[error("mixture weight {0} is outside [0, 1]")]
    InvalidWeight(f64),

    #[error("invalid act: {0}")]
    InvalidAct(String),

    #[error("invalid lottery: {0}")]
    InvalidLottery(String),

    #[error("invalid capacity: {0}")]
    InvalidCapacity(String),

    #[error("capacity is not supermodular")]
    NotSupermodular,

    #[error("capacity operations support at most {max} states, got {found}")]
    TooManyStates { max: usize, found: usize },

    #[error("perception family is empty")]
    EmptyFamily,

    #[error("invalid perception family: {0}")]
    InvalidFamily(String),

    #[error("cost is not grounded: minimum cost is {0}, expected 0")]
    NotGrounded(f64),

    #[error("operation requires the {expected} variant, model uses {found}")]
    UnsupportedVariant { expected: &'static str, found: String },

    #[error("dictionary is empty")]
    EmptyDictionary,

    #[error("unknown axiom id `{0}`")]
    UnknownAxiom(String),

    #[error("{0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, CapError>;
