use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate triangle with side lengths ({0}, {1}, {2})")]
    DegenerateTriangle(f64, f64, f64),

    #[error("hexagon for cuff {cuff} is numerically degenerate: {reason}")]
    DegenerateHexagon { cuff: usize, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("curve is not an edge-aligned simple cycle: {0}")]
    CurveNotEdgeAligned(String),

    #[error("curve separates the surface into {components} components")]
    SeparatingCurve { components: usize },

    #[error("factorization broke down at pivot {pivot} (value {value:e})")]
    FactorizationBreakdown { pivot: usize, value: f64 },

    #[error("eigensolver did not converge after {iterations} restarts; best residuals {residuals:?}")]
    NotConverged { iterations: usize, residuals: Vec<f64> },

    #[error("problem of size {size} exceeds the limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("test functions {i} and {j} are both nonzero on triangle {face}")]
    SupportOverlap { face: usize, i: usize, j: usize },

    #[error("function has zero mass norm")]
    ZeroNorm,

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
