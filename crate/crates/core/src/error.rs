use thiserror::Error;

/// Errors produced by the repair toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty reference")]
    EmptyReference,

    #[error("unencodable word: {0:?}")]
    Unencodable(String),

    #[error("{path}:{line}: {msg}")]
    FileFormat {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("config key {key}: {msg}")]
    Config { key: String, msg: String },

    #[error("span {start}+{len} out of bounds for sentence of {sentence_len} tokens")]
    SpanOutOfBounds {
        start: usize,
        len: usize,
        sentence_len: usize,
    },

    #[error("marked spans overlap at token {0}")]
    OverlappingSpans(usize),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("invalid fold count {k} for {examples} examples")]
    InvalidFolds { k: usize, examples: usize },

    #[error("empty reference list")]
    EmptyReferenceList,

    #[error("model file: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
