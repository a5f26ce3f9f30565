use thiserror::Error;

/// Errors produced by the analysis pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate histogram: image has a single intensity level")]
    DegenerateHistogram,

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no yarn found on the measurement line")]
    NoYarn,

    #[error("invalid scale {0} cm/px: must be positive")]
    InvalidScale(f64),

    #[error("invalid reference density {0}: must be positive")]
    InvalidReference(f64),

    #[error("measurement failed: {0}")]
    MeasurementFailed(String),

    #[error("insufficient yarns: need at least {needed}, found {found}")]
    InsufficientYarns { needed: usize, found: usize },

    #[error("invalid diameter {0}: must be positive")]
    InvalidDiameter(f64),

    #[error("invalid spacing {0}: must be positive")]
    InvalidSpacing(f64),

    #[error("invalid fraction {0}: must lie in [0, 1]")]
    InvalidFraction(f64),

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("indeterminate pattern: all cross-over sums are identical")]
    IndeterminatePattern,

    #[error("invalid synthetic fabric spec: {0}")]
    InvalidSpec(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the input was well-formed but the pipeline could not
    /// produce a measurement from it.
    pub fn is_measurement_failure(&self) -> bool {
        matches!(
            self,
            Error::DegenerateHistogram
                | Error::NoYarn
                | Error::MeasurementFailed(_)
                | Error::InsufficientYarns { .. }
                | Error::DecompositionFailed(_)
                | Error::IndeterminatePattern
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
