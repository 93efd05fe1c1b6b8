use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("non-finite value at cell {0}")]
    NonFinite(usize),
    #[error("empty region")]
    EmptyRegion,
    #[error("dyadic level {level} out of range 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
    #[error("invalid ball policy: {0}")]
    InvalidPolicy(String),
    #[error("weight is not positive at cell {0}")]
    NonPositiveWeight(usize),
    #[error("family does not cover domain (cell {0} uncovered)")]
    UncoveredDomain(usize),
    #[error("argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
    #[error("bracket exhausted")]
    BracketExhausted,
    #[error("degenerate Hölder ratio: zero denominator")]
    DegenerateHolder,
    #[error("BMO norm zero")]
    BmoNormZero,
    #[error("dilated region leaves the domain")]
    DilateOutsideDomain,
    #[error("not a growth function: {0}")]
    NotGrowthFunction(String),
    #[error("invalid ladder: {0}")]
    InvalidLadder(String),
    #[error("every admissible candidate was degenerate")]
    AllCandidatesDegenerate,
    #[error("cone quadrature incompatible with grid: {0}")]
    QuadratureIncompatible(String),
    #[error("height below root average ({average} > {height})")]
    HeightBelowRootAverage { average: f64, height: f64 },
    #[error("height must be positive")]
    NonPositiveHeight,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
