use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("size mismatch: expected {expected} values, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("degenerate potential at node ({i}, {j}): minimum Hessian eigenvalue {min_eig:e}")]
    DegeneratePotential { i: usize, j: usize, min_eig: f64 },
    #[error("inadmissible state at node ({i}, {j}): spectral radius {radius}")]
    Inadmissible { i: usize, j: usize, radius: f64 },
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("invalid polytope: {0}")]
    Polytope(#[from] PolytopeError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolytopeError {
    #[error("the polytope is unbounded")]
    Unbounded,
    #[error("the polytope has empty interior")]
    Empty,
    #[error("normal {normal:?} of facet {facet} is not primitive")]
    NonPrimitive { facet: usize, normal: [i64; 2] },
    #[error("facet {facet} is redundant")]
    Redundant { facet: usize },
    #[error("vertex {vertex:?} is not smooth: normal determinant {det}")]
    NotDelzant { vertex: [f64; 2], det: i64 },
}
