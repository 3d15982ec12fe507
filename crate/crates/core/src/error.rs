use thiserror::Error;

/// Errors raised by mesh construction, assembly and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("degenerate triangle: twice the area {area2:e} is below the threshold {threshold:e}")]
    DegenerateGeometry { area2: f64, threshold: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: {0}")]
    SingularMatrix(String),

    /// The shifted operator could not be factorized; the shift is (numerically)
    /// an eigenvalue of the pencil.
    #[error("factorization of the shifted operator failed at shift {shift}; try a different shift ({reason})")]
    ShiftFactorization { shift: f64, reason: String },

    #[error("eigensolver did not converge: {converged} of {wanted} pairs after {iterations} restarts")]
    ConvergenceFailure { converged: usize, wanted: usize, iterations: usize },

    #[error("quadrature rule of degree {0} is not available (supported: 1..=10)")]
    UnsupportedDegree(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
