use thiserror::Error;

pub type Result<T, E = FyError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FyError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("point {point} outside grid [0, {max}]")]
    OutsideGrid { point: f64, max: f64 },

    #[error("no bound state near guess {guess}: {reason}")]
    NoBoundState { guess: f64, reason: String },

    #[error("BiCGSTAB failed after {iterations} iterations (relative residual {residual:.3e}): {reason}")]
    Krylov {
        iterations: usize,
        residual: f64,
        reason: String,
    },

    #[error("inverse iteration did not converge in {iterations} outer steps (last change {last_change:.3e})")]
    NotConverged { iterations: usize, last_change: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("eigendecomposition failed: {0}; try perturbing the grid")]
    Eigen(String),

    #[error("matching radius near a node of the channel wave: |cos(p*y_max)| = {cos:.3} <= 0.1, adjust y_max")]
    MatchingNode { cos: f64 },

    #[error("invalid partition chain input: {0}")]
    Chains(String),
}
