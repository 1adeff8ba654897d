use crate::geometry::Point;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("projection undefined at the domain center: {0:?}")]
    DegeneratePoint(Point),

    #[error("point {point:?} is not on the boundary (signed distance {distance:e})")]
    NotOnBoundary { point: Point, distance: f64 },

    #[error("mesh regularity violated: min rho_T/h_T = {ratio:.4} < {threshold}")]
    RegularityViolation { ratio: f64, threshold: f64 },

    #[error("cell {cell} has non-positive volume {volume:e}")]
    InvertedCell { cell: usize, volume: f64 },

    #[error("facet {vertices:?} is shared by {count} cells")]
    NonManifold { vertices: Vec<usize>, count: usize },

    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("point {point:?} lies outside cell {cell}")]
    PointOutsideCell { cell: usize, point: Point },

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("saddle-point system is singular: {0}")]
    SingularSystem(String),

    #[error("sparse factorization failed: {0}")]
    FactorizationFailure(String),

    #[error("discrete H^(1/2) Gram matrix is not positive definite")]
    SingularGram,

    #[error("oracle mismatch in {field} at {point:?}: expected {expected:e}, got {actual:e}")]
    OracleMismatch {
        field: String,
        point: Point,
        expected: f64,
        actual: f64,
    },

    #[error("error column `{column}` is zero at level {level}; order undefined")]
    ZeroError { column: String, level: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
