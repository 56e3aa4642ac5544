//! JSON codec for the supported IAM subset: `Version`, `Statement`, `Sid`,
//! `Effect`, and the positive/negated principal, action and resource keys.

use serde::Serialize;
use serde_json::{Map, Value};

use super::{Effect, Matcher, Polarity, Policy, PolicyError, Statement};

pub fn parse_policy(text: &str) -> Result<Policy, PolicyError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| PolicyError::MalformedJson(e.to_string()))?;
    policy_from_value(&value)
}

pub(crate) fn policy_from_value(value: &Value) -> Result<Policy, PolicyError> {
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("policy document must be a JSON object"))?;
    for key in obj.keys() {
        if key != "Version" && key != "Statement" {
            return Err(PolicyError::UnsupportedFeature(format!(
                "top-level key {key:?}"
            )));
        }
    }
    let version = match obj.get("Version") {
        Some(Value::String(v)) => v.clone(),
        Some(_) => return Err(malformed("Version must be a string")),
        None => return Err(malformed("missing Version")),
    };
    let statements = match obj.get("Statement") {
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .map(|(i, s)| statement_from_value(s).map_err(|e| at_statement(i, e)))
            .collect::<Result<Vec<_>, _>>()?,
        Some(single @ Value::Object(_)) => {
            vec![statement_from_value(single).map_err(|e| at_statement(0, e))?]
        }
        Some(_) => return Err(malformed("Statement must be an array or object")),
        None => return Err(malformed("missing Statement")),
    };
    Ok(Policy {
        version,
        statements,
    })
}

fn at_statement(i: usize, e: PolicyError) -> PolicyError {
    match e {
        PolicyError::MalformedJson(m) => PolicyError::MalformedJson(format!("statement {i}: {m}")),
        PolicyError::UnsupportedFeature(m) => {
            PolicyError::UnsupportedFeature(format!("statement {i}: {m}"))
        }
    }
}

fn malformed(msg: &str) -> PolicyError {
    PolicyError::MalformedJson(msg.to_string())
}

fn statement_from_value(value: &Value) -> Result<Statement, PolicyError> {
    let obj = value
        .as_object()
        .ok_or_else(|| malformed("statement must be a JSON object"))?;
    for key in obj.keys() {
        match key.as_str() {
            "Sid" | "Effect" | "Principal" | "NotPrincipal" | "Action" | "NotAction"
            | "Resource" | "NotResource" => {}
            "Condition" => {
                return Err(PolicyError::UnsupportedFeature(
                    "Condition blocks are not supported".into(),
                ))
            }
            other => {
                return Err(PolicyError::UnsupportedFeature(format!(
                    "statement key {other:?}"
                )))
            }
        }
    }
    let sid = match obj.get("Sid") {
        None => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(malformed("Sid must be a string")),
    };
    let effect = match obj.get("Effect") {
        Some(Value::String(e)) if e == "Allow" => Effect::Allow,
        Some(Value::String(e)) if e == "Deny" => Effect::Deny,
        Some(other) => {
            return Err(PolicyError::MalformedJson(format!(
                "invalid Effect {other}"
            )))
        }
        None => return Err(malformed("missing Effect")),
    };
    let principal = match pick(obj, "Principal", "NotPrincipal")? {
        None => Matcher::any(),
        Some((polarity, v)) => Matcher::new(polarity, principal_patterns(v)?)
            .ok_or_else(|| malformed("empty principal list"))?,
    };
    let action = required_matcher(obj, "Action", "NotAction")?;
    let resource = required_matcher(obj, "Resource", "NotResource")?;
    Ok(Statement {
        sid,
        effect,
        principal,
        action,
        resource,
    })
}

fn pick<'a>(
    obj: &'a Map<String, Value>,
    positive: &str,
    negated: &str,
) -> Result<Option<(Polarity, &'a Value)>, PolicyError> {
    match (obj.get(positive), obj.get(negated)) {
        (Some(_), Some(_)) => Err(PolicyError::MalformedJson(format!(
            "both {positive} and {negated} present"
        ))),
        (Some(v), None) => Ok(Some((Polarity::Positive, v))),
        (None, Some(v)) => Ok(Some((Polarity::Negated, v))),
        (None, None) => Ok(None),
    }
}

fn required_matcher(
    obj: &Map<String, Value>,
    positive: &str,
    negated: &str,
) -> Result<Matcher, PolicyError> {
    let (polarity, v) = pick(obj, positive, negated)?
        .ok_or_else(|| PolicyError::MalformedJson(format!("missing {positive} or {negated}")))?;
    Matcher::new(polarity, string_list(v, positive)?)
        .ok_or_else(|| PolicyError::MalformedJson(format!("empty {positive} list")))
}

fn string_list(v: &Value, what: &str) -> Result<Vec<String>, PolicyError> {
    match v {
        Value::String(s) => Ok(vec![s.clone()]),
        Value::Array(items) => items
            .iter()
            .map(|item| match item {
                Value::String(s) => Ok(s.clone()),
                _ => Err(PolicyError::MalformedJson(format!(
                    "{what} entries must be strings"
                ))),
            })
            .collect(),
        _ => Err(PolicyError::MalformedJson(format!(
            "{what} must be a string or list of strings"
        ))),
    }
}

fn principal_patterns(v: &Value) -> Result<Vec<String>, PolicyError> {
    match v {
        Value::String(s) => Ok(vec![s.clone()]),
        Value::Object(map) => {
            let mut out = Vec::new();
            for (k, inner) in map {
                if k != "AWS" {
                    return Err(PolicyError::UnsupportedFeature(format!(
                        "principal type {k:?}"
                    )));
                }
                out.extend(string_list(inner, "Principal")?);
            }
            Ok(out)
        }
        _ => Err(malformed(
            "Principal must be a string or an {\"AWS\": ...} map",
        )),
    }
}

#[derive(Serialize)]
struct PolicyOut<'a> {
    #[serde(rename = "Version")]
    version: &'a str,
    #[serde(rename = "Statement")]
    statement: Vec<StatementOut<'a>>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum PrincipalOut<'a> {
    Any(&'a str),
    Aws {
        #[serde(rename = "AWS")]
        aws: &'a [String],
    },
}

#[derive(Serialize)]
struct StatementOut<'a> {
    #[serde(rename = "Sid", skip_serializing_if = "Option::is_none")]
    sid: Option<&'a str>,
    #[serde(rename = "Effect")]
    effect: &'static str,
    #[serde(rename = "Principal", skip_serializing_if = "Option::is_none")]
    principal: Option<PrincipalOut<'a>>,
    #[serde(rename = "NotPrincipal", skip_serializing_if = "Option::is_none")]
    not_principal: Option<PrincipalOut<'a>>,
    #[serde(rename = "Action", skip_serializing_if = "Option::is_none")]
    action: Option<&'a [String]>,
    #[serde(rename = "NotAction", skip_serializing_if = "Option::is_none")]
    not_action: Option<&'a [String]>,
    #[serde(rename = "Resource", skip_serializing_if = "Option::is_none")]
    resource: Option<&'a [String]>,
    #[serde(rename = "NotResource", skip_serializing_if = "Option::is_none")]
    not_resource: Option<&'a [String]>,
}

fn split(m: &Matcher) -> (Option<&[String]>, Option<&[String]>) {
    match m.polarity {
        Polarity::Positive => (Some(m.patterns()), None),
        Polarity::Negated => (None, Some(m.patterns())),
    }
}

fn principal_out(patterns: &[String]) -> PrincipalOut<'_> {
    if patterns.len() == 1 && patterns[0] == "*" {
        PrincipalOut::Any("*")
    } else {
        PrincipalOut::Aws { aws: patterns }
    }
}

fn to_out(p: &Policy) -> PolicyOut<'_> {
    PolicyOut {
        version: &p.version,
        statement: p
            .statements
            .iter()
            .map(|s| {
                let (pp, np) = split(&s.principal);
                let (pa, na) = split(&s.action);
                let (pr, nr) = split(&s.resource);
                StatementOut {
                    sid: s.sid.as_deref(),
                    effect: match s.effect {
                        Effect::Allow => "Allow",
                        Effect::Deny => "Deny",
                    },
                    principal: pp.map(principal_out),
                    not_principal: np.map(principal_out),
                    action: pa,
                    not_action: na,
                    resource: pr,
                    not_resource: nr,
                }
            })
            .collect(),
    }
}

/// Canonical compact JSON. Key order and list order are fixed, so equal
/// policies serialize to equal bytes.
pub fn serialize_policy(p: &Policy) -> String {
    serde_json::to_string(&to_out(p)).expect("policy serialization cannot fail")
}

/// Same canonical form, indented for files meant to be read by people.
pub fn serialize_policy_pretty(p: &Policy) -> String {
    serde_json::to_string_pretty(&to_out(p)).expect("policy serialization cannot fail")
}

impl serde::Serialize for Policy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_out(self).serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Policy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        policy_from_value(&v).map_err(serde::de::Error::custom)
    }
}
