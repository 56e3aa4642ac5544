use std::borrow::Cow;

use serde::{Deserialize, Serialize};

/// The three request fields a statement constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Principal,
    Action,
    Resource,
}

impl Field {
    pub const ALL: [Field; 3] = [Field::Principal, Field::Action, Field::Resource];

    pub fn name(self) -> &'static str {
        match self {
            Field::Principal => "principal",
            Field::Action => "action",
            Field::Resource => "resource",
        }
    }
}

/// The single place where field case rules live: actions compare
/// case-insensitively (ASCII folding), principals and resources verbatim.
/// Patterns and values are both passed through this before matching.
pub fn normalize_field(field: Field, text: &str) -> Cow<'_, str> {
    match field {
        Field::Action if text.bytes().any(|b| b.is_ascii_uppercase()) => {
            Cow::Owned(text.to_ascii_lowercase())
        }
        _ => Cow::Borrowed(text),
    }
}

pub fn field_matches(field: Field, pattern: &str, value: &str) -> bool {
    glob_match(
        &normalize_field(field, pattern),
        &normalize_field(field, value),
    )
}

/// Case-sensitive glob match: `*` matches any run of characters (including
/// `/` and `:`), `?` exactly one character, everything else itself.
pub fn glob_match(pattern: &str, value: &str) -> bool {
    let p: Vec<char> = pattern.chars().collect();
    let v: Vec<char> = value.chars().collect();
    let (mut pi, mut vi) = (0usize, 0usize);
    // most recent star position in the pattern and the value index it was tried at
    let mut backtrack: Option<(usize, usize)> = None;
    while vi < v.len() {
        match p.get(pi) {
            Some('*') => {
                backtrack = Some((pi, vi));
                pi += 1;
            }
            Some(&c) if c == '?' || c == v[vi] => {
                pi += 1;
                vi += 1;
            }
            _ => match backtrack {
                Some((star, at)) => {
                    pi = star + 1;
                    vi = at + 1;
                    backtrack = Some((star, at + 1));
                }
                None => return false,
            },
        }
    }
    p[pi..].iter().all(|&c| c == '*')
}
