use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state or vector fails a constraint that an operation requires.
    #[error("constraint violation: {what} (residual {residual:e})")]
    ConstraintViolation { what: &'static str, residual: f64 },

    /// Coincident projective points or an otherwise degenerate configuration.
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("spin-degenerate state: <w,w> = {0:e} is not negative")]
    SpinDegenerate(f64),

    #[error("phase unwrap ambiguous at sample {index}: increment {increment:.6} rad exceeds pi/2")]
    UnwrapAmbiguity { index: usize, increment: f64 },

    #[error("constraint projection failed to converge at step {step} (residual {residual:e})")]
    ProjectionFailure { step: usize, residual: f64 },

    #[error("invalid tangent: {0}")]
    InvalidTangent(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("null multipliers: u1 = u2 = 0 has no regime")]
    NullMultiplier,

    #[error("singular Legendre transformation: {0}")]
    SingularTransformation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("third-kind degenerate: <k, xdot> = 0")]
    ThirdKindDegenerate,

    #[error("invalid gauge vector: <e, k> = 0")]
    InvalidGaugeVector,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
