use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by the evaluation toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("too few points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("degenerate mesh: total surface area is zero")]
    DegenerateMesh,

    #[error("degenerate diameter: point set has zero extent")]
    DegenerateDiameter,

    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),

    #[error("extents must be strictly positive, got ({0}, {1}, {2})")]
    NonPositiveExtents(f64, f64, f64),

    #[error("invalid rotation: {0}")]
    InvalidRotation(String),

    #[error("threshold on `{field}` is active but instance `{instance_id}` has no value for it")]
    MissingField {
        field: &'static str,
        instance_id: String,
    },

    #[error("thresholds must have at least one active bound")]
    NoActiveBound,

    #[error("grid must be sorted in strictly ascending order")]
    UnsortedGrid,

    #[error("parse error in {path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("unsupported format for {path}: {msg}")]
    UnsupportedFormat { path: PathBuf, msg: String },

    #[error("unsupported schema version {got} (supported: {supported})")]
    SchemaVersion { got: u32, supported: u32 },

    #[error("validation error for instance `{instance_id}`: {msg}")]
    Validation { instance_id: String, msg: String },

    #[error("no annotated frames given")]
    EmptyFrames,

    #[error("voxel resolution {resolution} m exceeds smallest box extent {min_extent} m")]
    ResolutionTooCoarse { resolution: f64, min_extent: f64 },

    #[error("mesh has no vertices")]
    EmptyMesh,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn validation(instance_id: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            instance_id: instance_id.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
