use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("cannot parse `{0}` as a rational number")]
    Rational(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("step probability {0} is outside [0, 1]")]
    ProbabilityOutOfRange(String),
    #[error("x = {0} is outside [-1, 1]")]
    Domain(String),
    #[error("4p(1-p) = {four_pq} does not match x^2 = {x_squared}")]
    LinkageMismatch { four_pq: f64, x_squared: f64 },
    #[error("reflection weight (p/(1-p))^a is undefined for p = 1")]
    DegenerateParameter,
    #[error("barrier position must be at least 1, got {0}")]
    InvalidBarrier(u32),
    #[error("{what} is undefined at n = {n}")]
    UndefinedPoint { what: &'static str, n: u32 },
    #[error("received energy needs a non-negative emitted energy, got {0}")]
    NegativeEnergy(f64),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
