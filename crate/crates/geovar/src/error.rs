use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeovarError {
    #[error("matrix is numerically singular (condition estimate {0:e})")]
    SingularMatrix(f64),
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("matrix has entries outside the allowed sparsity pattern: {0}")]
    SupportViolation(String),
    #[error("one-form is not weakly null (residual {0:e})")]
    NotWeaklyNull(f64),
    #[error("Poisson solve did not converge after {iterations} iterations (residual {residual:e})")]
    PoissonNoConvergence { iterations: usize, residual: f64 },
    #[error("right-hand side is incompatible with the boundary conditions (mean {0:e})")]
    IncompatibleRHS(f64),
    #[error("diagnostic not defined for this model: {0}")]
    WrongModel(String),
    #[error("grids are not a 2x refinement pair: {0}")]
    IncompatibleGrids(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

pub type Result<T> = std::result::Result<T, GeovarError>;
