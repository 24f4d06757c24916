use std::path::PathBuf;

use crate::spectral::GershgorinDisc;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch { what: &'static str, expected: String, found: String },

    #[error("{what} is not symmetric: entry ({row}, {col}) = {a} but ({col}, {row}) = {b}")]
    Asymmetric { what: &'static str, row: usize, col: usize, a: f64, b: f64 },

    #[error("{what} has a nonzero diagonal entry at {index}: {value}")]
    NonzeroDiagonal { what: &'static str, index: usize, value: f64 },

    #[error("{what} has a negative entry {value} at ({row}, {col})")]
    NegativeEntry { what: &'static str, row: usize, col: usize, value: f64 },

    #[error("{what} has a non-finite entry at ({row}, {col})")]
    NonFinite { what: &'static str, row: usize, col: usize },

    #[error("{what} must contain at least one non-zero value")]
    AllZero { what: &'static str },

    #[error("cross proximity identically zero")]
    CrossProximityZero,

    #[error("origin requested but {0} is missing")]
    MissingOriginProximity(&'static str),

    #[error("reference index {index} is out of range for a set of {len} points")]
    InvalidReference { index: usize, len: usize },

    #[error("invalid constant {name} = {value}: must be finite and > 0")]
    InvalidConstant { name: &'static str, value: f64 },

    #[error("symmetric eigensolver did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix is not positive semi-definite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64, offending_discs: Vec<GershgorinDisc> },

    #[error("neither set has a Euclidean cosine law matrix (min eigenvalues X: {x_min:e}, Y: {y_min:e})")]
    NeitherSetEuclidean { x_min: f64, y_min: f64 },

    #[error("zeta_f = {0:e} is not positive; the cross blocks of the base cosine law matrix vanish")]
    ZetaNonpositive(f64),

    #[error("no admissible constants after {iterations} doublings (last c1 = {c1}, c2 = {c2}, c3 = {c3}, min eigenvalue {min_eigenvalue:e})")]
    SearchExhausted { iterations: usize, c1: f64, c2: f64, c3: f64, min_eigenvalue: f64 },

    #[error("constants c1 = {c1}, c2 = {c2}, c3 = {c3} rejected: {reason}")]
    ConstantsRejected { c1: f64, c2: f64, c3: f64, reason: String },

    #[error("coordinate file does not match the instance: {0}")]
    ShapeMismatch(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
