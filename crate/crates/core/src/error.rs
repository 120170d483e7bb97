use std::path::PathBuf;

/// Errors produced anywhere in the simulation stack.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument `{field}`: {message}")]
    InvalidArgument { field: &'static str, message: String },

    #[error("`{field}` out of range: {message}")]
    OutOfRange { field: &'static str, message: String },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("histogram has zero total weight")]
    EmptyHistogram,

    #[error("histogram mean {0} is not positive")]
    DegenerateMetering(f64),

    #[error("unknown algorithm `{name}` (registered: {})", known.join(", "))]
    UnknownAlgorithm {
        name: String,
        known: Vec<&'static str>,
    },

    #[error("no bounding box available for time step {0}")]
    MissingBox(usize),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error at {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("malformed manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("unsupported manifest version {found} (supported: {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn out_of_range(field: &'static str, message: impl Into<String>) -> Self {
        Error::OutOfRange {
            field,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable code, used in CLI and HTTP error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument { .. } => "invalid_argument",
            Error::OutOfRange { .. } => "out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::EmptyHistogram => "empty_histogram",
            Error::DegenerateMetering(_) => "degenerate_metering",
            Error::UnknownAlgorithm { .. } => "unknown_algorithm",
            Error::MissingBox(_) => "missing_box",
            Error::Capacity(_) => "capacity",
            Error::Io { .. } => "io",
            Error::Image { .. } => "image",
            Error::Manifest { .. } => "manifest",
            Error::UnsupportedVersion { .. } => "unsupported_version",
            Error::Serde(_) => "serde",
            Error::Csv(_) => "csv",
        }
    }

    /// The offending input field, when one can be named.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            Error::InvalidArgument { field, .. } | Error::OutOfRange { field, .. } => Some(field),
            Error::UnknownAlgorithm { .. } => Some("algorithm"),
            Error::MissingBox(_) => Some("box"),
            _ => None,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
