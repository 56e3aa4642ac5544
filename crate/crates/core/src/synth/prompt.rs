use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SynthError;
use crate::fgdsl::{parse_fgspec, render_fgspec, FgError, FgSpec};
use crate::policy::Request;
use crate::specgen::{CorpusEntry, RequestSpec};

pub const CONCRETE_HEADER: &str = "Create an AWS IAM policy that incorporates all of the following requests. Return only the JSON policy, nothing else:";
pub const DESCRIPTION_HEADER: &str =
    "Create an AWS IAM policy based on this description. Return only the JSON policy, nothing else:";
pub const ACCOUNT_ID_NOTE: &str = "*Note: Use ACCOUNT_ID as placeholder in ARNs";
pub const ALLOWED_SECTION: &str = "Allowed requests:";
pub const DENIED_SECTION: &str = "Denied requests:";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptKind {
    ConcreteRequest,
    CoarseGrained,
    FineGrainedSyntax,
}

impl PromptKind {
    pub fn header(self) -> &'static str {
        match self {
            PromptKind::ConcreteRequest => CONCRETE_HEADER,
            PromptKind::CoarseGrained | PromptKind::FineGrainedSyntax => DESCRIPTION_HEADER,
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text.to_ascii_lowercase().replace('-', "_").as_str() {
            "concrete_request" | "concrete" | "a" => Some(PromptKind::ConcreteRequest),
            "coarse_grained" | "coarse" | "b" => Some(PromptKind::CoarseGrained),
            "fine_grained_syntax" | "fine_grained" | "fine" | "c" => {
                Some(PromptKind::FineGrainedSyntax)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prompt {
    pub kind: PromptKind,
    pub text: String,
    pub source_id: String,
}

impl Prompt {
    /// Hex SHA-256 of the prompt text; the replay fixture key.
    pub fn hash(&self) -> String {
        Sha256::digest(self.text.as_bytes())
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PromptSource<'a> {
    Requests(&'a RequestSpec),
    Corpus(&'a CorpusEntry),
}

/// One request rendered as a JSON object on a single line.
pub fn request_line(r: &Request) -> String {
    let q = |s: &str| serde_json::to_string(s).expect("string serializes");
    format!(
        "{{\"principal\": {}, \"action\": {}, \"resource\": {}}}",
        q(&r.principal),
        q(&r.action),
        q(&r.resource)
    )
}

pub fn build_prompt(kind: PromptKind, source: PromptSource<'_>) -> Result<Prompt, SynthError> {
    let mut text = String::from(kind.header());
    text.push('\n');
    let source_id = match (kind, source) {
        (PromptKind::ConcreteRequest, PromptSource::Requests(spec)) => {
            for (section, list) in [
                (ALLOWED_SECTION, &spec.allowed),
                (DENIED_SECTION, &spec.denied),
            ] {
                if list.is_empty() {
                    continue;
                }
                text.push_str(section);
                text.push('\n');
                for r in list {
                    text.push_str(&request_line(r));
                    text.push('\n');
                }
            }
            spec.id()
        }
        (PromptKind::CoarseGrained, PromptSource::Corpus(entry)) => {
            text.push_str(entry.coarse_description.trim_end());
            text.push('\n');
            entry.id.clone()
        }
        (PromptKind::FineGrainedSyntax, PromptSource::Corpus(entry)) => {
            text.push_str(&render_fgspec(&entry.fg_spec));
            text.push_str(ACCOUNT_ID_NOTE);
            text.push('\n');
            entry.id.clone()
        }
        (kind, _) => return Err(SynthError::KindSourceMismatch(kind)),
    };
    Ok(Prompt {
        kind,
        text,
        source_id,
    })
}

/// Recovers the allowed and denied requests from a concrete-request prompt.
pub fn requests_from_prompt(text: &str) -> Result<(Vec<Request>, Vec<Request>), String> {
    let mut lines = text.lines();
    if lines.next() != Some(CONCRETE_HEADER) {
        return Err("not a concrete-request prompt".into());
    }
    let mut allowed = Vec::new();
    let mut denied = Vec::new();
    let mut current: Option<&mut Vec<Request>> = None;
    for line in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == ALLOWED_SECTION {
            current = Some(&mut allowed);
        } else if line == DENIED_SECTION {
            current = Some(&mut denied);
        } else {
            let r: Request = serde_json::from_str(line).map_err(|e| format!("{line}: {e}"))?;
            match current.as_deref_mut() {
                Some(list) => list.push(r),
                None => return Err("request before any section heading".into()),
            }
        }
    }
    Ok((allowed, denied))
}

/// Recovers the fine-grained spec from a fine-grained-syntax prompt.
pub fn fgspec_from_prompt(text: &str) -> Result<FgSpec, FgError> {
    let body: String = text
        .lines()
        .skip(1)
        .filter(|l| l.trim() != ACCOUNT_ID_NOTE)
        .map(|l| format!("{l}\n"))
        .collect();
    parse_fgspec(&body)
}
