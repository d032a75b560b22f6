use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("configuration has no interaction centers")]
    Empty,
    #[error("centers {0} and {1} coincide")]
    DuplicateCenter(usize, usize),
    #[error("centers and strengths differ in length ({centers} vs {strengths})")]
    LengthMismatch { centers: usize, strengths: usize },
    #[error("weight diverges at the evaluation point")]
    SingularPoint,
    #[error("lambda_max must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("bound state requires alpha < 0, got {0}")]
    PositiveAlpha(f64),
    #[error("green kernel evaluated at the origin")]
    Origin,
    #[error("Gamma(z) is numerically singular at z = {0} (inverse norm {1:e})")]
    AtPole(crate::C64, f64),
    #[error("Bethe-Peierls fit residual {0:e} exceeds tolerance")]
    FitDiverged(f64),
    #[error("oscillation unresolved: step {step:e} exceeds allowed {allowed:e}")]
    OscillationUnresolved { step: f64, allowed: f64 },
    #[error("damped s-tail bound {0:e} exceeds tolerance")]
    TailTooLarge(f64),
    #[error("R-escalation did not converge (last change {0:e})")]
    NoConvergence(f64),
    #[error("operation requires a single interaction center, got {0}")]
    NotSingleCenter(usize),
    #[error("norm diverges: {0}")]
    Divergent(String),
    #[error("invalid exponent {0}")]
    InvalidExponent(f64),
    #[error("Pitt parameters out of range: {0}")]
    PittParameters(String),
    #[error("right-hand side of the Pitt ratio vanishes")]
    ZeroDenominator,
    #[error("q >= 3 is outside the bounded regime; use the blow-up demo")]
    Regime,
    #[error("exponents are not dual: 1/p + 1/q = {0}")]
    NonDual(f64),
    #[error("fit needs at least 4 rows in the window, got {0}")]
    TooFewPoints(usize),
    #[error("unknown preset {0}")]
    UnknownPreset(String),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
