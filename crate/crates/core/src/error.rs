use alloc::string::String;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A document breaks one of its structural invariants.
    #[error("document {doc_id}: invalid {field}: {message}")]
    Validation {
        doc_id: String,
        field: String,
        message: String,
    },
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("invalid label set: {0}")]
    LabelSet(String),
    #[error("unknown mention `{mention}` in document {doc_id}")]
    UnknownMention { doc_id: String, mention: String },
    #[error("link source `{mention}` in document {doc_id} is not an event")]
    SourceNotEvent { doc_id: String, mention: String },
    #[error("invalid span {start}..{end} over {len} tokens")]
    Span { start: usize, end: usize, len: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("missing vector for chain target `{0}`")]
    MissingTarget(String),
    #[error("no classifier head for category {0}")]
    MissingHead(crate::Category),
    #[error("invalid split: {0}")]
    Split(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}: {detail}")]
    NonFiniteLoss {
        epoch: usize,
        batch: usize,
        detail: String,
    },
    #[error("encoder failure: {0}")]
    Encoder(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("report mismatch: {0}")]
    Report(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
