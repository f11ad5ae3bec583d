use thiserror::Error;

/// Errors raised by the evidential grid library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame of discernment: {0}")]
    InvalidFrame(String),
    #[error("frame mismatch: {left} vs {right}")]
    FrameMismatch { left: String, right: String },
    #[error("invalid mass function: {0}")]
    InvalidMass(String),
    #[error("total conflict: conjunctive mass on the empty set is {conflict}")]
    TotalConflict { conflict: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cell ({i}, {j}) outside a {width}x{height} grid")]
    OutOfBounds {
        i: i64,
        j: i64,
        width: usize,
        height: usize,
    },
    #[error("grid specs differ")]
    GridMismatch,
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("time {t} outside [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },
    #[error("pose ({x}, {y}) outside the grid")]
    PoseOutsideGrid { x: f64, y: f64 },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
