//! Shared error type for the toolkit.

use thiserror::Error;

/// All failure modes across the toolkit.
#[derive(Debug, Error)]
pub enum StixelError {
    /// Invalid configuration, parameters or usage.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed file or byte stream.
    #[error("format error: {0}")]
    Format(String),

    /// A value fell outside its valid domain.
    #[error("range error: {0}")]
    Range(String),

    /// Mismatched array or tensor shapes.
    #[error("shape error: {0}")]
    Shape(String),

    /// A point landed at or behind the camera plane.
    #[error("behind-camera error: z = {z}")]
    BehindCamera { z: f64 },

    /// The data does not fit the target encoding.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A calibration search failed to reach its target.
    #[error("calibration error: {0}")]
    Calibration(String),

    /// Prediction and annotation frames do not line up.
    #[error("alignment error: {0}")]
    Alignment(String),

    /// Invalid geometry encountered during evaluation.
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl StixelError {
    /// True for errors caused by bad configuration or usage rather than
    /// bad input data. The CLI maps these to exit code 2, everything else
    /// to exit code 1.
    pub fn is_config(&self) -> bool {
        matches!(self, StixelError::Config(_) | StixelError::Calibration(_))
    }
}

pub type Result<T> = std::result::Result<T, StixelError>;
