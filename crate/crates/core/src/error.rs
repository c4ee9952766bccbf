use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solver diverged at iteration {iteration}: non-finite objective or gradient")]
    Divergence {
        iteration: usize,
        /// Objective values of the iterations completed before the failure.
        objective_history: Vec<f64>,
    },

    #[error("log-likelihood of data point {index} is not finite at theta = {theta:?}")]
    Evaluation { index: usize, theta: Vec<f64> },

    #[error("matrix is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("Newton iterations did not reach tolerance (final gradient inf-norm {grad_norm:e})")]
    Convergence { grad_norm: f64 },

    #[error("negative log-joint Hessian is not positive definite at the mode")]
    Curvature,

    #[error("support enumeration needs {required} subsets, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
