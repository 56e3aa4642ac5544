//! Synthetic concrete-request specifications and the ground-truth corpus.

mod corpus;
mod generate;

use std::path::PathBuf;

use thiserror::Error;

pub use corpus::{
    load_corpus, load_corpus_entry, validate_corpus, CorpusEntry, Tag, ValidationReport,
    ValidationRow, COARSE_FILE, META_FILE, POLICY_FILE, SPEC_FILE,
};
pub use generate::{generate_request_spec, GenParams, RequestSpec, S3_ACTIONS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecGenError {
    #[error("generation parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("cannot read {}: {1}", .0.display())]
    Io(PathBuf, String),
    #[error("corpus entry {id}: {detail}")]
    InvalidEntry { id: String, detail: String },
    #[error("corpus entry {id} failed validation: {detail}")]
    ValidationFailure { id: String, detail: String },
}
