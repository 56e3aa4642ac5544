//! The fine-grained specification language: one access triple per line.
//!
//! ```text
//! spec    := { line } ;
//! line    := effect SP subject SP verb SP object [comment] NL ;
//! effect  := "ALLOW" | "DENY" ;
//! subject := ("user:"|"role:"|"service:"|"account:") name | "any" ;
//! verb    := "READ"|"WRITE"|"DELETE"|"LIST"|"ACL" | literal-action ;
//! object  := "bucket:" name ["/" keyglob] | arn | "*" ;
//! ```
//!
//! Keywords are case-insensitive, names keep their case, `#` starts a
//! comment. Specs compile deterministically into policies.

mod compile;
mod parse;

use std::fmt;

use thiserror::Error;

pub use compile::{compile_fgspec, verb_actions};
pub use parse::parse_fgspec;

use crate::policy::Effect;

pub const DEFAULT_ACCOUNT_ID: &str = "ACCOUNT_ID";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FgError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: unknown verb {verb:?}")]
    UnknownVerb {
        line: usize,
        column: usize,
        verb: String,
    },
    #[error("line {line}, column {column}: unknown subject kind {kind:?}")]
    UnknownSubjectKind {
        line: usize,
        column: usize,
        kind: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubjectKind {
    User,
    Role,
    Service,
    Account,
    Any,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subject {
    pub kind: SubjectKind,
    /// Empty for [`SubjectKind::Any`].
    pub name: String,
}

impl Subject {
    pub fn any() -> Self {
        Self {
            kind: SubjectKind::Any,
            name: String::new(),
        }
    }

    pub fn user(name: impl Into<String>) -> Self {
        Self {
            kind: SubjectKind::User,
            name: name.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Verb {
    Read,
    Write,
    Delete,
    List,
    Acl,
    /// A `service:Operation` action passed through unchanged.
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Object {
    /// `bucket:<name>[/<key>]`. `key` is `None` without a slash and
    /// `Some("")` for a trailing slash, so rendering reproduces the input.
    Bucket {
        name: String,
        key: Option<String>,
    },
    Arn(String),
    Any,
}

impl Object {
    /// Key glob the object stands for: a missing key, or one ending in `/`,
    /// covers everything under the prefix.
    pub fn key_glob(&self) -> Option<String> {
        match self {
            Object::Bucket { key, .. } => Some(match key.as_deref() {
                None | Some("") => "*".to_string(),
                Some(k) if k.ends_with('/') => format!("{k}*"),
                Some(k) => k.to_string(),
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FgLine {
    pub effect: Effect,
    pub subject: Subject,
    pub verb: Verb,
    pub object: Object,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FgSpec {
    pub lines: Vec<FgLine>,
    /// Account placeholder substituted into user and role ARNs.
    pub account_id: String,
}

impl FgSpec {
    pub fn new(lines: Vec<FgLine>) -> Self {
        Self {
            lines,
            account_id: DEFAULT_ACCOUNT_ID.to_string(),
        }
    }

    pub fn with_account_id(mut self, account_id: impl Into<String>) -> Self {
        self.account_id = account_id.into();
        self
    }
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.kind {
            SubjectKind::Any => return f.write_str("any"),
            SubjectKind::User => "user",
            SubjectKind::Role => "role",
            SubjectKind::Service => "service",
            SubjectKind::Account => "account",
        };
        write!(f, "{prefix}:{}", self.name)
    }
}

impl fmt::Display for Verb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verb::Read => "READ",
            Verb::Write => "WRITE",
            Verb::Delete => "DELETE",
            Verb::List => "LIST",
            Verb::Acl => "ACL",
            Verb::Literal(a) => a,
        })
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Object::Any => f.write_str("*"),
            Object::Arn(a) => f.write_str(a),
            Object::Bucket { name, key: None } => write!(f, "bucket:{name}"),
            Object::Bucket { name, key: Some(k) } => write!(f, "bucket:{name}/{k}"),
        }
    }
}

impl fmt::Display for FgLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let effect = match self.effect {
            Effect::Allow => "ALLOW",
            Effect::Deny => "DENY",
        };
        write!(f, "{effect} {} {} {}", self.subject, self.verb, self.object)
    }
}

/// Canonical text: one line per triple, each terminated by a newline.
pub fn render_fgspec(s: &FgSpec) -> String {
    let mut out = String::new();
    for line in &s.lines {
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_round_trips() {
        for text in [
            "ALLOW user:alice READ bucket:public-bucket/",
            "DENY any WRITE *",
            "ALLOW user:bob s3:PutObjectAcl bucket:b/logs/*",
        ] {
            let spec = parse_fgspec(text).unwrap();
            let rendered = render_fgspec(&spec);
            assert_eq!(rendered, format!("{text}\n"));
            assert_eq!(parse_fgspec(&rendered).unwrap(), spec);
        }
    }

    #[test]
    fn key_glob_normalization() {
        let b = |k: Option<&str>| Object::Bucket {
            name: "b".into(),
            key: k.map(str::to_string),
        };
        assert_eq!(b(None).key_glob().unwrap(), "*");
        assert_eq!(b(Some("")).key_glob().unwrap(), "*");
        assert_eq!(b(Some("logs/")).key_glob().unwrap(), "logs/*");
        assert_eq!(b(Some("logs/*.gz")).key_glob().unwrap(), "logs/*.gz");
        assert_eq!(Object::Any.key_glob(), None);
    }
}
