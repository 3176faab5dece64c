use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {0}")]
    FileNotFound(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),

    #[error("mesh has no faces")]
    EmptyMesh,

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate mesh: all vertices coincide")]
    DegenerateMesh,

    #[error("mesh has zero total surface area")]
    ZeroArea,

    #[error("point {index} at ({x}, {y}, {z}) lies outside the voxel bounds")]
    PointOutOfBounds { index: usize, x: f64, y: f64, z: f64 },

    #[error("target point lies outside the grid bounds")]
    TargetOutOfBounds,

    #[error("view space needs at least two views, got {0}")]
    TooFewViews(usize),

    #[error("view id {id} out of range (view count {count})")]
    UnknownView { id: usize, count: usize },

    #[error("empty view selection")]
    EmptySelection,

    #[error("brute-force enumeration limited to {cap} views, got {got}")]
    EnumerationCap { cap: usize, got: usize },

    #[error("cover problem is infeasible at beta = 0 for alpha = {alpha}")]
    InfeasibleAtZero { alpha: u32 },

    #[error("no surface point is visible from at least {alpha} views")]
    NoCoverablePoints { alpha: u32 },

    #[error("requested {requested} random views but only {available} candidates exist")]
    TooManyViews { requested: usize, available: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid visibility matrix file: {0}")]
    InvalidMatrixFile(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the caller's files or parameters rather than by the
    /// object's geometry.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::InfeasibleAtZero { .. } | Error::NoCoverablePoints { .. } | Error::EnumerationCap { .. }
        )
    }

    /// Errors that mean no feasible cover exists.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::InfeasibleAtZero { .. } | Error::NoCoverablePoints { .. })
    }
}
