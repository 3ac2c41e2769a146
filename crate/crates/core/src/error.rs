use crate::nn::LossRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid residue '{symbol}' at position {position}")]
    InvalidResidue { symbol: char, position: usize },

    #[error("sequence length {len} is below the minimum of {min}")]
    TooShort { len: usize, min: usize },

    #[error("sequence length {len} exceeds the maximum of {max}")]
    TooLong { len: usize, max: usize },

    #[error("decoded sequence is empty")]
    EmptySequence,

    #[error("pattern requests nothing: at least one taste must be marked '1'")]
    EmptyPattern,

    #[error("descriptor {descriptor}: {msg}")]
    Descriptor { descriptor: &'static str, msg: String },

    #[error("layer {layer}: {msg}")]
    Shape { layer: usize, msg: String },

    #[error("training diverged at epoch {epoch} (non-finite loss)")]
    Diverged { epoch: usize, history: Vec<LossRecord> },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid data: {0}")]
    Data(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse failure category, used by the CLI to choose an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::EmptyPattern => ErrorKind::Config,
            Error::Diverged { .. } | Error::Numeric(_) | Error::Shape { .. } => ErrorKind::Numeric,
            Error::Stage { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
