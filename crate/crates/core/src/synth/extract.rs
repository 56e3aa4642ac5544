use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::policy::{policy_from_value, Policy, PolicyError};

/// Why no policy could be taken from a response.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum ExtractionFailure {
    #[error("no policy document in response")]
    NoJsonFound,
    #[error("malformed policy document: {0}")]
    MalformedJson(String),
    #[error("policy uses an unsupported feature: {0}")]
    UnsupportedFeature(String),
}

impl ExtractionFailure {
    pub fn tag(&self) -> &'static str {
        match self {
            ExtractionFailure::NoJsonFound => "no_json_found",
            ExtractionFailure::MalformedJson(_) => "malformed_json",
            ExtractionFailure::UnsupportedFeature(_) => "unsupported_feature",
        }
    }
}

impl From<PolicyError> for ExtractionFailure {
    fn from(e: PolicyError) -> Self {
        match e {
            PolicyError::MalformedJson(m) => ExtractionFailure::MalformedJson(m),
            PolicyError::UnsupportedFeature(m) => ExtractionFailure::UnsupportedFeature(m),
        }
    }
}

/// Byte offset one past the `}` closing the object opened at `start`, or
/// `None` when the text ends first. String literals are skipped.
fn balanced_end(bytes: &[u8], start: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, &b) in bytes.iter().enumerate().skip(start) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

/// Takes the first balanced top-level JSON object with a `Statement` key
/// out of surrounding prose and code fences. Objects that fail to parse
/// are only reported when no later object parses.
pub fn extract_policy(raw: &str) -> Result<Policy, ExtractionFailure> {
    let bytes = raw.as_bytes();
    let mut pos = 0;
    let mut found: Option<Result<Policy, ExtractionFailure>> = None;
    let mut malformed: Option<ExtractionFailure> = None;
    let mut candidates = 0usize;
    while let Some(off) = raw[pos..].find('{') {
        let start = pos + off;
        let Some(end) = balanced_end(bytes, start) else {
            if malformed.is_none() && raw[start..].contains("\"Statement\"") {
                malformed = Some(ExtractionFailure::MalformedJson(
                    "unterminated JSON object".into(),
                ));
            }
            pos = start + 1;
            continue;
        };
        let slice = &raw[start..end];
        match serde_json::from_str::<Value>(slice) {
            Ok(v) => {
                if v.get("Statement").is_some() {
                    candidates += 1;
                    if found.is_none() {
                        found = Some(policy_from_value(&v).map_err(Into::into));
                    }
                }
                pos = end;
            }
            Err(e) => {
                if malformed.is_none() && slice.contains("\"Statement\"") {
                    malformed = Some(ExtractionFailure::MalformedJson(e.to_string()));
                }
                pos = start + 1;
            }
        }
    }
    if candidates > 1 {
        tracing::info!(
            candidates,
            "response contains several policy documents; using the first"
        );
    }
    found.unwrap_or_else(|| Err(malformed.unwrap_or(ExtractionFailure::NoJsonFound)))
}
