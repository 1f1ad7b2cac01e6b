use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("√{n} is not in ℚ(ζ_{conductor}); it needs a conductor divisible by {needed}")]
    NoSquareRoot { n: i64, conductor: u32, needed: u32 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("cocycle exponent {0} is not an integer")]
    NonIntegralCocycle(String),

    #[error("invariant construction failed: {0}")]
    DegenerateJacobian(String),

    #[error("generator selection failed for w_{index}: {reason} (kernel basis size {kernel_dim})")]
    KernelSelection { index: usize, reason: String, kernel_dim: usize },

    #[error("W_{{{i},{m}}}: {reason}")]
    LeadingTerm { i: usize, m: usize, reason: String },

    #[error("solver: {0}")]
    Solver(String),

    #[error("degenerate metric in potential")]
    DegenerateMetric,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
