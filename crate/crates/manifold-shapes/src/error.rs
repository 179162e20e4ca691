use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("registration is not supported on this grid topology")]
    UnsupportedRegistration,

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("OBJ parse error at line {line}: {msg}")]
    ObjParse { line: usize, msg: String },

    #[error("wrong grid kind: {0}")]
    WrongGridKind(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("normalized stress is undefined for an all-zero distance matrix")]
    UndefinedStress,

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("neighbor graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("degenerate manifold: zero total variance")]
    DegenerateManifold,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("stage '{stage}' failed: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn in_stage(self, stage: &str) -> Error {
        Error::Stage {
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
