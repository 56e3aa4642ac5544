//! Policy and request data model for the supported IAM subset.

mod codec;
mod eval;
mod glob;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub(crate) use codec::policy_from_value;
pub use codec::{parse_policy, serialize_policy, serialize_policy_pretty};
pub use eval::evaluate;
pub use glob::{field_matches, glob_match, normalize_field, Field};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("malformed policy JSON: {0}")]
    MalformedJson(String),
    #[error("unsupported policy feature: {0}")]
    UnsupportedFeature(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RequestError {
    #[error("request field `{0}` is empty")]
    EmptyField(&'static str),
    #[error("request field `{field}` contains glob metacharacter in {value:?}")]
    Metacharacter { field: &'static str, value: String },
    #[error("action {0:?} must contain exactly one ':' between service and operation")]
    BadAction(String),
}

/// One concrete access request.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Request {
    pub principal: String,
    pub action: String,
    pub resource: String,
}

impl Request {
    pub fn new(
        principal: impl Into<String>,
        action: impl Into<String>,
        resource: impl Into<String>,
    ) -> Result<Self, RequestError> {
        let r = Self {
            principal: principal.into(),
            action: action.into(),
            resource: resource.into(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), RequestError> {
        for (name, value) in [
            ("principal", &self.principal),
            ("action", &self.action),
            ("resource", &self.resource),
        ] {
            if value.is_empty() {
                return Err(RequestError::EmptyField(name));
            }
            if value.contains(['*', '?']) {
                return Err(RequestError::Metacharacter {
                    field: name,
                    value: value.clone(),
                });
            }
        }
        validate_action(&self.action)
    }

    pub fn field(&self, field: Field) -> &str {
        match field {
            Field::Principal => &self.principal,
            Field::Action => &self.action,
            Field::Resource => &self.resource,
        }
    }
}

/// `service:Operation` with both halves non-empty and no wildcards.
pub fn validate_action(action: &str) -> Result<(), RequestError> {
    let mut parts = action.split(':');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(svc), Some(op), None)
            if !svc.is_empty() && !op.is_empty() && !action.contains(['*', '?']) =>
        {
            Ok(())
        }
        _ => Err(RequestError::BadAction(action.to_string())),
    }
}

impl fmt::Display for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.principal, self.action, self.resource
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Effect {
    Allow,
    Deny,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarity {
    Positive,
    /// `NotPrincipal`, `NotAction`, `NotResource`.
    Negated,
}

/// A field constraint: a union of glob patterns, optionally complemented.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matcher {
    pub polarity: Polarity,
    patterns: Vec<String>,
}

impl Matcher {
    /// Returns `None` for an empty pattern list.
    pub fn new(polarity: Polarity, patterns: Vec<String>) -> Option<Self> {
        if patterns.is_empty() {
            None
        } else {
            Some(Self { polarity, patterns })
        }
    }

    pub fn positive<I, S>(patterns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(
            Polarity::Positive,
            patterns.into_iter().map(Into::into).collect(),
        )
        .expect("at least one pattern")
    }

    pub fn negated<I, S>(patterns: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(
            Polarity::Negated,
            patterns.into_iter().map(Into::into).collect(),
        )
        .expect("at least one pattern")
    }

    pub fn any() -> Self {
        Self::positive(["*"])
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    pub fn is_any(&self) -> bool {
        self.polarity == Polarity::Positive && self.patterns.iter().any(|p| p == "*")
    }

    pub fn matches(&self, field: Field, value: &str) -> bool {
        let hit = self.patterns.iter().any(|p| field_matches(field, p, value));
        match self.polarity {
            Polarity::Positive => hit,
            Polarity::Negated => !hit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    pub sid: Option<String>,
    pub effect: Effect,
    pub principal: Matcher,
    pub action: Matcher,
    pub resource: Matcher,
}

impl Statement {
    pub fn matcher(&self, field: Field) -> &Matcher {
        match field {
            Field::Principal => &self.principal,
            Field::Action => &self.action,
            Field::Resource => &self.resource,
        }
    }

    pub fn matches(&self, r: &Request) -> bool {
        Field::ALL
            .iter()
            .all(|&f| self.matcher(f).matches(f, r.field(f)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Policy {
    pub version: String,
    pub statements: Vec<Statement>,
}

pub const DEFAULT_VERSION: &str = "2012-10-17";

impl Policy {
    pub fn new(statements: Vec<Statement>) -> Self {
        Self {
            version: DEFAULT_VERSION.to_string(),
            statements,
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    /// All patterns appearing in the policy, tagged with their field.
    pub fn patterns(&self) -> impl Iterator<Item = (Field, &str)> {
        self.statements.iter().flat_map(|s| {
            Field::ALL
                .into_iter()
                .flat_map(move |f| s.matcher(f).patterns().iter().map(move |p| (f, p.as_str())))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    ExplicitDeny,
    Allowed,
    ImplicitDeny,
}

impl Decision {
    pub fn is_allowed(self) -> bool {
        self == Decision::Allowed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_invariants() {
        assert!(Request::new("alice", "s3:GetObject", "b/x").is_ok());
        assert_eq!(
            Request::new("", "s3:GetObject", "b/x"),
            Err(RequestError::EmptyField("principal"))
        );
        assert!(matches!(
            Request::new("alice", "s3:Get*", "b/x"),
            Err(RequestError::Metacharacter {
                field: "action",
                ..
            })
        ));
        assert!(matches!(
            Request::new("alice", "s3GetObject", "b/x"),
            Err(RequestError::BadAction(_))
        ));
        assert!(matches!(
            Request::new("alice", "s3:a:b", "b/x"),
            Err(RequestError::BadAction(_))
        ));
        assert!(matches!(
            Request::new("alice", ":GetObject", "b/x"),
            Err(RequestError::BadAction(_))
        ));
    }

    #[test]
    fn matcher_requires_patterns() {
        assert!(Matcher::new(Polarity::Positive, vec![]).is_none());
        assert!(Matcher::any().is_any());
        assert!(Matcher::any().matches(Field::Resource, "anything/at:all"));
        assert!(!Matcher::negated(["*"]).matches(Field::Resource, "x"));
    }
}
