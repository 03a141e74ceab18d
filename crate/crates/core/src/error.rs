use thiserror::Error;

use crate::matrix::PosDefMatrix;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix is not symmetric: asymmetry {asymmetry:e} exceeds tolerance {tol:e}")]
    NotSymmetric { asymmetry: f64, tol: f64 },

    #[error("matrix is singular (smallest singular value {min_singular:e})")]
    Singular { min_singular: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("tuple size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("matrix is ill-conditioned (condition number {cond:e} > 1e12)")]
    IllConditioned { cond: f64 },

    #[error("geodesic parameter {0} outside [0, 1]")]
    TOutOfRange(f64),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("barycenter iteration did not collapse after {rounds} rounds (diameter {diameter:e})")]
    NoCollapse {
        rounds: usize,
        diameter: f64,
        iterate: Box<PosDefMatrix>,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("word ball exceeds the cap of {cap} elements")]
    BallTooLarge { cap: usize },

    #[error(
        "representation is not uniformly bounded at radius {radius} (size history never plateaus)"
    )]
    NotUniformlyBounded { radius: usize, history: Vec<f64> },

    #[error("unsupported group kind: {0}")]
    UnsupportedGroup(String),

    #[error("point is not fixed by the subgroup (displacement {displacement:e})")]
    NotSubgroupFixed { displacement: f64 },

    #[error("normal generators do not span a normal subgroup: {0}")]
    NormalityViolated(String),

    #[error("stage-1 fixed point failed: {0}")]
    Stage1Failed(Box<Error>),

    #[error("malformed {what}: {msg}")]
    Parse { what: String, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
