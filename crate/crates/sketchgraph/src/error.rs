use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared across the pipeline stages.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at record {record}: {message}")]
    Parse { record: usize, message: String },

    #[error("zero-extent sketch")]
    ZeroExtent,

    #[error("sketch not normalized (canvas_size is unset)")]
    NotNormalized,

    #[error("degenerate pair: p == q")]
    DegeneratePair,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("graph not undirected")]
    NotUndirected,

    #[error("vertex index {0} out of range")]
    IndexOutOfRange(usize),

    #[error("coordinate outside canvas at stroke {stroke}, vertex {vertex}: ({x}, {y})")]
    OutOfCanvas {
        stroke: usize,
        vertex: usize,
        x: f64,
        y: f64,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("png: {0}")]
    Png(String),
}

impl Error {
    /// Process exit code contract: 2 for usage/input errors, 1 for internal ones.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::ZeroExtent
            | Error::NotNormalized
            | Error::DegeneratePair
            | Error::ShapeMismatch(_)
            | Error::NotUndirected
            | Error::OutOfCanvas { .. }
            | Error::InvalidInput(_)
            | Error::File { .. }
            | Error::Io(_)
            | Error::Json(_)
            | Error::Png(_) => 2,
            Error::IndexOutOfRange(_) => 1,
        }
    }
}

impl From<png::EncodingError> for Error {
    fn from(e: png::EncodingError) -> Self {
        Error::Png(e.to_string())
    }
}

impl From<png::DecodingError> for Error {
    fn from(e: png::DecodingError) -> Self {
        Error::Png(e.to_string())
    }
}
