use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("token index {index} out of range for document of {len} tokens")]
    InvalidIndex { index: usize, len: usize },

    #[error("invalid replacement {0:?}: must be non-empty and contain no whitespace")]
    InvalidReplacement(String),

    #[error("invalid chunk parameters: chunk_size={chunk_size}, overlap={overlap} (need 0 < overlap < chunk_size)")]
    InvalidChunkParams { chunk_size: usize, overlap: usize },

    #[error("embedding parse error at line {line}: {message}")]
    EmbeddingParse { line: usize, message: String },

    #[error("embedding source is empty")]
    EmptyEmbeddings,

    #[error("word {0:?} is not in the embedding vocabulary")]
    OutOfVocabulary(String),

    #[error("cosine similarity undefined for a zero vector")]
    ZeroVector,

    #[error("vector dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("label {label} out of range for {class_count} classes")]
    InvalidLabel { label: usize, class_count: usize },

    #[error("cannot delete from a single-token document")]
    NoDeletableWord,

    #[error("model file is corrupted or truncated: {0}")]
    CorruptModel(String),

    #[error("model file version {found} is not supported (expected {expected})")]
    ModelVersion { found: u16, expected: u16 },

    #[error("model was trained against embedding checksum {expected} but the loaded table has {found}")]
    ChecksumMismatch { expected: String, found: String },

    #[error("corpus error in {file} at line {line}: {message}")]
    CorpusParse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("missing corpus split file: {0}")]
    MissingSplit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
