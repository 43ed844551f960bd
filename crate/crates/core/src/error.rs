use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("paper `{0}` has an empty author list")]
    EmptyAuthorList(String),

    #[error("paper `{paper}` lists author `{author}` more than once")]
    DuplicateAuthor { paper: String, author: String },

    #[error("paper `{paper}` references unknown author `{author}`")]
    UnknownAuthor { paper: String, author: String },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("paper `{0}` has an invalid citation count")]
    InvalidCitations(String),

    #[error("dataset has no {0}")]
    EmptyDataset(&'static str),

    #[error("dataset is empty after pruning ({papers} papers, {authors} authors remain)")]
    EmptyAfterPrune { papers: usize, authors: usize },

    #[error("dimension mismatch: expected {expected} {what}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("alias map contains a cycle through `{0}`")]
    AliasCycle(String),

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
