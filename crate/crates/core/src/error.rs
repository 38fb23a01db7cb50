use thiserror::Error;

/// Errors raised anywhere in the discretization pipeline.
#[derive(Error, Debug)]
pub enum Error {
    #[error("parameter {value} outside the unit interval")]
    Domain { value: f64 },
    #[error("invalid knot vector: {0}")]
    Knots(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("singular Jacobian (det = {det:e}) in patch {patch} at {xi:?}")]
    SingularJacobian {
        patch: usize,
        xi: [f64; 3],
        det: f64,
    },
    #[error("topology mismatch between patches {a} and {b}: {reason}")]
    Topology { a: usize, b: usize, reason: String },
    #[error("interface validation failed: max deviation {deviation:e} ({reason})")]
    Interface { deviation: f64, reason: String },
    #[error("unknown builtin geometry `{0}`")]
    UnknownGeometry(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("gauge: {0}")]
    Gauge(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
