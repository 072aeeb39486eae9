use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("q = {0} is not a prime congruent to 1 mod 4")]
    InvalidField(u32),
    #[error("polynomial is not monic")]
    NotMonic,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("coefficient {value} out of range for q = {q}")]
    CoefficientRange { value: u32, q: u32 },
    #[error("mixed fields: q = {0} and q = {1}")]
    FieldMismatch(u32, u32),
    #[error("{0} is not irreducible")]
    NotIrreducible(String),
    #[error("discriminant must be square-free of odd degree >= 3, got {0}")]
    BadDiscriminant(String),
    #[error("direct Gauss sum over {size} residues exceeds the budget {budget}")]
    GaussBudget { size: u128, budget: u128 },
    #[error("point lies within {distance:e} of a zero")]
    NearZero { distance: f64 },
    #[error("root finder failed to converge for degree {0}")]
    RootFinder(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error("io error at {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
