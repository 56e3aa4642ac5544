//! Policy-synthesis backends: a live chat-completion client, file replay,
//! the deterministic fine-grained-spec oracle, and a few control backends
//! used by the experiments.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use thiserror::Error;

use super::extract_policy;
use super::prompt::{fgspec_from_prompt, requests_from_prompt, Prompt, PromptKind};
use crate::fgdsl::compile_fgspec;
use crate::policy::{serialize_policy_pretty, Effect, Matcher, Policy, Request, Statement};
use crate::specgen::CorpusEntry;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    /// The model answered but declined; the message is kept as the response.
    #[error("backend refused: {0}")]
    Refusal(String),
    #[error("backend configuration: {0}")]
    Config(String),
}

pub trait Backend: Send + Sync {
    fn id(&self) -> String;

    /// Decoding parameters recorded with every response.
    fn params(&self) -> Value {
        Value::Null
    }

    /// One model call. Implementations may retry transport failures but
    /// never re-ask after a completed answer.
    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> String {
        (**self).id()
    }
    fn params(&self) -> Value {
        (**self).params()
    }
    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        (**self).complete(prompt)
    }
}

/// Perfect synthesizer. Fine-grained prompts are compiled, concrete-request
/// prompts become one exact Allow statement per allowed request and one
/// exact Deny per denied request, and coarse prompts resolve through the
/// registered corpus.
#[derive(Debug, Default, Clone)]
pub struct OracleBackend {
    corpus: HashMap<String, Policy>,
    broad: bool,
}

impl OracleBackend {
    pub fn new() -> Self {
        Self::default()
    }

    /// Concrete-request prompts get [`broad_request_policy`] instead of the
    /// exact one. Still classifies perfectly, but relies on its Deny statements.
    pub fn broad(mut self) -> Self {
        self.broad = true;
        self
    }

    pub fn with_corpus(mut self, entries: &[CorpusEntry]) -> Self {
        for e in entries {
            self.corpus.insert(e.id.clone(), compile_fgspec(&e.fg_spec));
        }
        self
    }
}

/// The policy that classifies a concrete-request specification perfectly.
pub fn exact_request_policy(allowed: &[Request], denied: &[Request]) -> Policy {
    let stmt = |effect, r: &Request| Statement {
        sid: None,
        effect,
        principal: Matcher::positive([r.principal.clone()]),
        action: Matcher::positive([r.action.clone()]),
        resource: Matcher::positive([r.resource.clone()]),
    };
    Policy::new(
        allowed
            .iter()
            .map(|r| stmt(Effect::Allow, r))
            .chain(denied.iter().map(|r| stmt(Effect::Deny, r)))
            .collect(),
    )
}

/// One Allow over every principal, action and bucket seen among the allowed
/// requests, plus an exact Deny per denied request.
pub fn broad_request_policy(allowed: &[Request], denied: &[Request]) -> Policy {
    let distinct = |f: &dyn Fn(&Request) -> String| {
        let set: std::collections::BTreeSet<String> = allowed.iter().map(f).collect();
        set.into_iter().collect::<Vec<_>>()
    };
    let bucket = |r: &Request| match r.resource.split_once('/') {
        Some((b, _)) => format!("{b}/*"),
        None => r.resource.clone(),
    };
    let mut statements = Vec::new();
    if !allowed.is_empty() {
        statements.push(Statement {
            sid: None,
            effect: Effect::Allow,
            principal: Matcher::positive(distinct(&|r| r.principal.clone())),
            action: Matcher::positive(distinct(&|r| r.action.clone())),
            resource: Matcher::positive(distinct(&bucket)),
        });
    }
    let mut p = exact_request_policy(&[], denied);
    statements.append(&mut p.statements);
    p.statements = statements;
    p
}

impl Backend for OracleBackend {
    fn id(&self) -> String {
        "oracle".into()
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let policy = match prompt.kind {
            PromptKind::FineGrainedSyntax => {
                let spec = fgspec_from_prompt(&prompt.text).map_err(|e| {
                    BackendError::Refusal(format!("cannot read specification: {e}"))
                })?;
                compile_fgspec(&spec)
            }
            PromptKind::ConcreteRequest => {
                let (allowed, denied) =
                    requests_from_prompt(&prompt.text).map_err(BackendError::Refusal)?;
                if self.broad {
                    broad_request_policy(&allowed, &denied)
                } else {
                    exact_request_policy(&allowed, &denied)
                }
            }
            PromptKind::CoarseGrained => {
                self.corpus.get(&prompt.source_id).cloned().ok_or_else(|| {
                    BackendError::Refusal(format!(
                        "no corpus entry {:?} registered for a coarse description",
                        prompt.source_id
                    ))
                })?
            }
        };
        Ok(serialize_policy_pretty(&policy))
    }
}

/// Serves recorded responses from `<dir>/<prompt sha256>.txt`.
#[derive(Debug, Clone)]
pub struct ReplayBackend {
    dir: PathBuf,
}

impl ReplayBackend {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn fixture_path(dir: &Path, prompt: &Prompt) -> PathBuf {
        dir.join(format!("{}.txt", prompt.hash()))
    }
}

impl Backend for ReplayBackend {
    fn id(&self) -> String {
        "replay".into()
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let path = Self::fixture_path(&self.dir, prompt);
        fs::read_to_string(&path).map_err(|e| {
            BackendError::Unreachable(format!(
                "no replay fixture for {} ({}): {e}",
                prompt.source_id,
                path.display()
            ))
        })
    }
}

/// Writes every successful response of the wrapped backend as a replay fixture.
pub struct RecordingBackend<B> {
    inner: B,
    dir: PathBuf,
}

impl<B: Backend> RecordingBackend<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> Self {
        Self {
            inner,
            dir: dir.into(),
        }
    }
}

impl<B: Backend> Backend for RecordingBackend<B> {
    fn id(&self) -> String {
        self.inner.id()
    }
    fn params(&self) -> Value {
        self.inner.params()
    }
    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let raw = self.inner.complete(prompt)?;
        fs::create_dir_all(&self.dir)
            .and_then(|_| fs::write(ReplayBackend::fixture_path(&self.dir, prompt), &raw))
            .map_err(|e| BackendError::Config(format!("cannot record fixture: {e}")))?;
        Ok(raw)
    }
}

/// Returns the same response for every prompt.
#[derive(Debug, Clone)]
pub struct ConstantBackend {
    response: String,
}

impl ConstantBackend {
    pub fn new(response: impl Into<String>) -> Self {
        Self {
            response: response.into(),
        }
    }

    /// Allows every request.
    pub fn allow_all() -> Self {
        Self::new(serialize_policy_pretty(&Policy::new(vec![Statement {
            sid: None,
            effect: Effect::Allow,
            principal: Matcher::any(),
            action: Matcher::any(),
            resource: Matcher::any(),
        }])))
    }
}

impl Backend for ConstantBackend {
    fn id(&self) -> String {
        "constant".into()
    }
    fn complete(&self, _prompt: &Prompt) -> Result<String, BackendError> {
        Ok(self.response.clone())
    }
}

/// Mutant: removes every Deny statement from the wrapped backend's policy.
pub struct DenyDroppingBackend<B> {
    inner: B,
}

impl<B: Backend> DenyDroppingBackend<B> {
    pub fn new(inner: B) -> Self {
        Self { inner }
    }
}

impl<B: Backend> Backend for DenyDroppingBackend<B> {
    fn id(&self) -> String {
        format!("deny-dropping({})", self.inner.id())
    }
    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let raw = self.inner.complete(prompt)?;
        match extract_policy(&raw) {
            Ok(mut p) => {
                p.statements.retain(|s| s.effect == Effect::Allow);
                Ok(serialize_policy_pretty(&p))
            }
            Err(_) => Ok(raw),
        }
    }
}

/// Spaces calls to the wrapped backend at least `interval` apart.
pub struct RateLimited<B> {
    inner: B,
    interval: Duration,
    last: Mutex<Option<Instant>>,
}

impl<B: Backend> RateLimited<B> {
    pub fn new(inner: B, interval: Duration) -> Self {
        Self {
            inner,
            interval,
            last: Mutex::new(None),
        }
    }
}

impl<B: Backend> Backend for RateLimited<B> {
    fn id(&self) -> String {
        self.inner.id()
    }
    fn params(&self) -> Value {
        self.inner.params()
    }
    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        {
            let mut last = self.last.lock().expect("rate limiter lock");
            if let Some(t) = *last {
                let wait = self.interval.saturating_sub(t.elapsed());
                if !wait.is_zero() {
                    std::thread::sleep(wait);
                }
            }
            *last = Some(Instant::now());
        }
        self.inner.complete(prompt)
    }
}

pub const ENV_ENDPOINT: &str = "POLICY_SYNTH_ENDPOINT";
pub const ENV_API_KEY: &str = "POLICY_SYNTH_API_KEY";
pub const ENV_MODEL: &str = "POLICY_SYNTH_MODEL";
pub const ENV_TEMPERATURE: &str = "POLICY_SYNTH_TEMPERATURE";

/// OpenAI-style chat-completion client. Each prompt is sent as a single
/// user message (zero-shot).
#[derive(Debug, Clone)]
pub struct HttpBackend {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub temperature: f64,
    pub transport_retries: u32,
    pub timeout: Duration,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: None,
            model: model.into(),
            temperature: 0.0,
            transport_retries: 2,
            timeout: Duration::from_secs(120),
        }
    }

    /// Reads endpoint, model, key and optional temperature from the environment.
    pub fn from_env() -> Result<Self, BackendError> {
        let var = |name: &str| std::env::var(name).ok().filter(|v| !v.is_empty());
        let endpoint = var(ENV_ENDPOINT)
            .ok_or_else(|| BackendError::Config(format!("{ENV_ENDPOINT} is not set")))?;
        let model = var(ENV_MODEL)
            .ok_or_else(|| BackendError::Config(format!("{ENV_MODEL} is not set")))?;
        let mut b = Self::new(endpoint, model);
        b.api_key = var(ENV_API_KEY);
        if let Some(t) = var(ENV_TEMPERATURE) {
            b.temperature = t.parse().map_err(|_| {
                BackendError::Config(format!("{ENV_TEMPERATURE}={t} is not a number"))
            })?;
        }
        Ok(b)
    }

    fn request_body(&self, prompt: &Prompt) -> Value {
        json!({
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "user", "content": prompt.text}],
        })
    }
}

fn response_text(body: &Value) -> Result<String, BackendError> {
    let choice = body
        .pointer("/choices/0")
        .ok_or_else(|| BackendError::Unreachable(format!("response has no choices: {body}")))?;
    if let Some(refusal) = choice.pointer("/message/refusal").and_then(Value::as_str) {
        return Err(BackendError::Refusal(refusal.to_string()));
    }
    let content = choice
        .pointer("/message/content")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    if choice.get("finish_reason").and_then(Value::as_str) == Some("content_filter") {
        return Err(BackendError::Refusal(if content.is_empty() {
            "response withheld by content filter".into()
        } else {
            content
        }));
    }
    Ok(content)
}

impl Backend for HttpBackend {
    fn id(&self) -> String {
        format!("http:{}", self.model)
    }

    fn params(&self) -> Value {
        json!({"model": self.model, "temperature": self.temperature})
    }

    fn complete(&self, prompt: &Prompt) -> Result<String, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(self.timeout)
            .build()
            .map_err(|e| BackendError::Config(e.to_string()))?;
        let body = self.request_body(prompt);
        let mut attempt = 0;
        loop {
            let mut req = client.post(&self.endpoint).json(&body);
            if let Some(key) = &self.api_key {
                req = req.bearer_auth(key);
            }
            match req.send() {
                Ok(resp) => {
                    let status = resp.status();
                    let value: Value = resp.json().map_err(|e| {
                        BackendError::Unreachable(format!("unreadable response: {e}"))
                    })?;
                    if !status.is_success() {
                        return Err(BackendError::Unreachable(format!("HTTP {status}: {value}")));
                    }
                    return response_text(&value);
                }
                Err(e) if attempt < self.transport_retries => {
                    attempt += 1;
                    tracing::warn!(attempt, error = %e, "transport error, retrying");
                }
                Err(e) => return Err(BackendError::Unreachable(e.to_string())),
            }
        }
    }
}
