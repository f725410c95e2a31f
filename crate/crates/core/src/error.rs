use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero has no content")]
    ZeroContent,
    #[error("resultant undefined: both polynomials are constant in X")]
    ConstantResultant,
    #[error("degree in X must be at least 2")]
    DegreeTooSmall,
    #[error("vanishing reduction mod {0}")]
    VanishingReduction(u64),
    #[error("modulus {0} is not a supported prime")]
    BadModulus(String),
    #[error("normalize first: form content is not 1")]
    NotNormalized,
    #[error("form has repeated factors")]
    RepeatedFactors,
    #[error("enumeration budget exceeded ({0})")]
    BudgetExceeded(String),
    #[error("singular point, choose another base point")]
    SingularPoint,
    #[error("inseparable family")]
    Inseparable,
    #[error("cannot detect branching at infinity; declare infinity_branch explicitly ({0})")]
    InfinityUndetected(String),
    #[error("specialization at branch point")]
    BranchPoint,
    #[error("specialization drops degree in X at t0 = ({0} : {1})")]
    DegreeDrop(String, String),
    #[error("run squarefree_scan first: F-value is not certified squarefree")]
    NotCertifiedSquarefree,
    #[error("Krasner stabilization failed; raise cap or fix S0")]
    KrasnerFailed,
    #[error("no basepoint found within search range")]
    NoBasepoint,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}
