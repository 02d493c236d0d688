use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Each variant maps to a distinct process exit code in the CLI (see
/// [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("[geometry] degenerate input: {0}")]
    DegenerateInput(String),

    #[error("[geometry] insufficient points: requested {requested} neighbors but only {available} available")]
    InsufficientPoints { requested: usize, available: usize },

    #[error("[geometry] degenerate angle: {0}")]
    DegenerateAngle(&'static str),

    #[error("[scale] degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("[synthetic] trajectory escaped bounded region at iterate {iterate} (|x| = {magnitude})")]
    NumericEscape { iterate: usize, magnitude: f64 },

    #[error("[null] missing null table for {0}")]
    MissingNull(String),

    #[error("[null] corrupt cache file {path}: {reason}")]
    CacheIntegrity { path: PathBuf, reason: String },

    #[error("[io] {path}: {reason}")]
    Input { path: PathBuf, reason: String },

    #[error("[io] {0}")]
    Io(#[from] std::io::Error),

    #[error("[io] report: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) => 3,
            Error::Input { .. } => 4,
            Error::DegenerateInput(_)
            | Error::DegenerateGrid(_)
            | Error::DegenerateAngle(_)
            | Error::InsufficientPoints { .. } => 5,
            Error::NumericEscape { .. } => 6,
            Error::MissingNull(_) => 7,
            Error::CacheIntegrity { .. } => 8,
            Error::Io(_) | Error::Json(_) => 9,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
