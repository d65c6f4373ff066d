use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: expected {expected}")]
    Syntax { pos: usize, expected: String },
    #[error("division by a non-constant expression at byte {pos}")]
    NonPolynomial { pos: usize },
    #[error("exponent at byte {pos} must be a nonnegative integer literal")]
    Exponent { pos: usize },
    #[error("denominator is the zero polynomial")]
    DivisionByZeroPoly,
    #[error("division by zero")]
    DivisionByZero,
    #[error("evaluation at a pole")]
    EvalAtPole,
    #[error("degenerate vector field: X1 is zero")]
    DegenerateField,
    #[error("internal verification failed: {0}")]
    InternalVerifyFailed(String),
    #[error("search budget exceeded")]
    BudgetExceeded,
    #[error("no derivation rule for symbol {0}")]
    MissingRule(String),
    #[error("multi-index length mismatch")]
    LengthMismatch,
    #[error("witness does not satisfy its defining equation")]
    WitnessInvalid,
    #[error("base point is singular for the certificate")]
    BasePointSingular,
    #[error("trajectory left the region |x| <= 1e6")]
    TrajectoryBlowup,
    #[error("integration path meets a singularity")]
    PathSingular,
    #[error("quadrature did not converge")]
    QuadratureNonConvergent,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
