use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("step too large: t = {t} inverts a triangle (largest admissible |t| is {max_admissible:.6e})")]
    StepTooLarge { t: f64, max_admissible: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (best residuals {best_residuals:?})")]
    NoConvergence {
        iterations: usize,
        best_residuals: Vec<f64>,
    },

    #[error("near-degenerate system: {0}")]
    NearDegenerate(String),

    #[error("inadmissible geometry: b * kappa_sup = {0} is not below 1")]
    InadmissibleGeometry(f64),

    #[error("undefined angle: {0}")]
    UndefinedAngle(String),

    #[error("singular parametrization: |gamma'| vanishes near t = {t}")]
    SingularParametrization { t: f64 },

    #[error("step size: {0}")]
    StepSize(String),

    #[error("eigenpair tracking failed: {0}")]
    Tracking(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("degenerate eigenvalue: {0}")]
    Degenerate(String),

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
