use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("triangle {triangle} references a vertex out of range")]
    VertexOutOfRange { triangle: usize },
    #[error("triangle {triangle} has zero area")]
    Degenerate { triangle: usize },
    #[error("edge {edge} is shared by more than two triangles")]
    NonManifoldEdge { edge: usize },
    #[error("boundary edge {edge} does not lie on a side of the unit square")]
    OffBoundaryEdge { edge: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FemError {
    #[error("quadrature of exactness {requested} is not available (maximum {max})")]
    UnsupportedOrder { requested: usize, max: usize },
    #[error("local mass matrix of degree {degree} is not positive definite")]
    SingularMass { degree: usize },
    #[error("coefficient tensor is not positive definite at ({x}, {y}) (smallest eigenvalue {eigenvalue})")]
    NotPositiveDefinite { x: f64, y: f64, eigenvalue: f64 },
    #[error("polynomial degree k = {0} is not supported (need k >= 2)")]
    UnsupportedDegree(usize),
}

#[derive(Debug, Error)]
pub enum SystemError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("solution is not finite")]
    NonFinite,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least two rows to compute orders, got {0}")]
    TooFewRows(usize),
    #[error("levels must double between rows: 1/h = {prev} followed by {next}")]
    NonDoubling { prev: usize, next: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CaseError {
    #[error("unknown case `{name}`; available: {available}")]
    Unknown { name: String, available: String },
    #[error("case `{name}` is inconsistent: max deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    Inconsistent { name: String, deviation: f64, tolerance: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("no refinement levels given")]
    EmptyLevels,
    #[error("1/h = {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("levels must be strictly increasing: {prev} followed by {next}")]
    NotIncreasing { prev: usize, next: usize },
    #[error("polynomial degree k = {0} is not supported (need k >= 2)")]
    UnsupportedDegree(usize),
}
