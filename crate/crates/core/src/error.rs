use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed validation. `field` names the offending input using
    /// the lens-profile field names (`kx`, `focal_reciprocal`, `samples`, ...).
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },

    #[error(
        "angle of view {requested_deg:.3}° is out of range for k = {k}; \
         maximum achievable is {max_deg:.3}°{}",
        if *max_inclusive { "" } else { " (exclusive)" }
    )]
    AovOutOfRange {
        k: f64,
        requested_deg: f64,
        max_deg: f64,
        max_inclusive: bool,
    },

    #[error("focal length too short for k = {k}: |k|·f⁻¹ = {product} exceeds 1")]
    FocalTooShort { k: f64, product: f64 },

    #[error("{what} lies beyond the field of this projection")]
    OutsideField { what: &'static str },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("image: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// The input field this error is attributed to, for structured reporting.
    pub fn field(&self) -> &str {
        match self {
            Error::Invalid { field, .. } => field,
            Error::AovOutOfRange { .. } => "fov",
            Error::FocalTooShort { .. } => "focal_reciprocal",
            Error::OutsideField { .. } => "lens",
            Error::Io { .. } | Error::Format { .. } | Error::Image(_) => "file",
        }
    }

    /// True for errors caused by the filesystem or file contents rather than
    /// by parameter values.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. } | Error::Format { .. } | Error::Image(_)
        )
    }
}
