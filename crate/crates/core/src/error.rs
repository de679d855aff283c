use thiserror::Error;

#[derive(Debug, Error)]
pub enum AcsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("no convergence after {iterations} iterations: {reason}")]
    NoConvergence { iterations: usize, reason: String },

    #[error("singular jacobian at grid point {point} (condition {condition:.3e})")]
    SingularJacobian { point: usize, condition: f64 },

    #[error("singular factor at grid point {point} (condition {condition:.3e})")]
    SingularFactor { point: usize, condition: f64 },

    #[error("graph condition failed at grid point {point}: eigenspace is not a graph over the antiholomorphic frame")]
    GraphConditionFailed { point: usize },

    #[error("smallness violated: sup norm {norm:.4} must be < 1")]
    SmallnessViolated { norm: f64 },

    #[error("admissibility lost: |H - id|_C1 = {norm:.4e} exceeds {bound:.4e}")]
    AdmissibilityLost { norm: f64, bound: f64 },

    #[error("too few active Littlewood-Paley blocks ({active}, need {needed})")]
    TooFewBlocks { active: usize, needed: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("continuation failed at t = {t}: {source}")]
    Continuation {
        t: f64,
        #[source]
        source: Box<AcsError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, AcsError>;
