//! Prompt construction, model backends, and policy extraction from free-form
//! responses.

mod backend;
mod extract;
mod prompt;
mod transcript;

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub use backend::{
    broad_request_policy, exact_request_policy, Backend, BackendError, ConstantBackend,
    DenyDroppingBackend, HttpBackend, OracleBackend, RateLimited, RecordingBackend, ReplayBackend,
    ENV_API_KEY, ENV_ENDPOINT, ENV_MODEL, ENV_TEMPERATURE,
};
pub use extract::{extract_policy, ExtractionFailure};
pub use prompt::{
    build_prompt, fgspec_from_prompt, request_line, requests_from_prompt, Prompt, PromptKind,
    PromptSource, ACCOUNT_ID_NOTE, ALLOWED_SECTION, CONCRETE_HEADER, DENIED_SECTION,
    DESCRIPTION_HEADER,
};
pub use transcript::{read_transcript, TranscriptSink};

use crate::policy::Policy;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("prompt kind {0:?} does not fit the given source")]
    KindSourceMismatch(PromptKind),
    #[error("backend unreachable: {0}")]
    BackendUnreachable(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

/// Everything observed about one model call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRecord {
    pub prompt: Prompt,
    pub raw_response: String,
    pub extracted: Result<Policy, ExtractionFailure>,
    pub backend_id: String,
    pub params: Value,
    pub timestamp_ms: u64,
    pub latency_ms: u64,
    pub refused: bool,
}

impl SynthesisRecord {
    pub fn policy(&self) -> Option<&Policy> {
        self.extracted.as_ref().ok()
    }
}

/// Sends the prompt once. Refusals become records (their text usually holds
/// no policy); only transport and configuration problems are errors.
pub fn synthesize(prompt: &Prompt, backend: &dyn Backend) -> Result<SynthesisRecord, SynthError> {
    let timestamp_ms = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or_default();
    let started = Instant::now();
    let outcome = backend.complete(prompt);
    let latency_ms = started.elapsed().as_millis() as u64;
    let (raw_response, refused) = match outcome {
        Ok(raw) => (raw, false),
        Err(BackendError::Refusal(msg)) => (msg, true),
        Err(BackendError::Unreachable(msg)) => return Err(SynthError::BackendUnreachable(msg)),
        Err(BackendError::Config(msg)) => return Err(SynthError::Config(msg)),
    };
    let extracted = extract_policy(&raw_response);
    tracing::debug!(
        source = %prompt.source_id,
        backend = %backend.id(),
        latency_ms,
        ok = extracted.is_ok(),
        "synthesized"
    );
    Ok(SynthesisRecord {
        prompt: prompt.clone(),
        raw_response,
        extracted,
        backend_id: backend.id(),
        params: backend.params(),
        timestamp_ms,
        latency_ms,
        refused,
    })
}
