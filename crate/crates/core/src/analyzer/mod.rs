//! Policy denotations as symbolic request sets, four-way permissiveness
//! comparison with exact difference counts, and per-request classification.

mod classify;
mod compare;
mod request_set;

use std::sync::Arc;

use thiserror::Error;

pub use classify::{classify_requests, Classification, ClassifiedRequest, Expectation};
pub use compare::{
    compare, compare_default, default_bound, min_bound, ComparisonVerdict, Relation,
};
pub use request_set::{Cube, RequestSet};

use crate::pattern::{Alphabet, Dfa, PatternError};
use crate::policy::{normalize_field, Effect, Field, Matcher, Polarity, Policy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalyzerError {
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("length bound {bound} is shorter than the literal length {required} in the policies")]
    BoundTooSmall { bound: usize, required: usize },
    #[error("specification has no requests")]
    EmptySpecification,
}

impl AnalyzerError {
    pub fn is_char_outside_alphabet(&self) -> bool {
        matches!(
            self,
            AnalyzerError::Pattern(PatternError::CharOutsideAlphabet { .. })
        )
    }
}

/// The set of requests `p` allows: the Allow cubes minus the Deny cubes.
///
/// For every request `r` over the alphabet, `denote(p).contains(r)` holds
/// exactly when `evaluate(p, r)` is `Allowed`.
pub fn denote(p: &Policy, alphabet: &Arc<Alphabet>) -> Result<RequestSet, AnalyzerError> {
    let mut allow = RequestSet::empty(Arc::clone(alphabet));
    let mut deny = RequestSet::empty(Arc::clone(alphabet));
    for s in &p.statements {
        let mut fields = Vec::with_capacity(3);
        for f in Field::ALL {
            fields.push(matcher_language(s.matcher(f), f, &allow)?);
        }
        let [pr, ac, rs]: [Dfa; 3] = fields.try_into().expect("three fields");
        let cube = Cube::new(pr, ac, rs);
        match s.effect {
            Effect::Allow => allow.push_cube(cube)?,
            Effect::Deny => deny.push_cube(cube)?,
        }
    }
    allow.difference(&deny)
}

fn matcher_language(m: &Matcher, field: Field, sets: &RequestSet) -> Result<Dfa, AnalyzerError> {
    let universe = sets.field_universe(field);
    let mut union = Dfa::empty(Arc::clone(sets.alphabet()));
    for p in m.patterns() {
        let d = Dfa::compile_glob(&normalize_field(field, p), Arc::clone(sets.alphabet()))?;
        union = union.union(&d)?;
    }
    let positive = union.intersect(universe)?;
    Ok(match m.polarity {
        Polarity::Positive => positive,
        Polarity::Negated => universe.difference(&positive)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policy::{evaluate, Request, Statement};

    fn stmt(effect: Effect, p: &str, a: &str, r: &str) -> Statement {
        Statement {
            sid: None,
            effect,
            principal: Matcher::positive([p]),
            action: Matcher::positive([a]),
            resource: Matcher::positive([r]),
        }
    }

    fn req(p: &str, a: &str, r: &str) -> Request {
        Request {
            principal: p.into(),
            action: a.into(),
            resource: r.into(),
        }
    }

    #[test]
    fn empty_policy_denotes_nothing() {
        let al = Arc::new(Alphabet::iam_default());
        assert!(denote(&Policy::empty(), &al).unwrap().is_empty());
    }

    #[test]
    fn single_allow_cube() {
        let al = Arc::new(Alphabet::iam_default());
        let p = Policy::new(vec![stmt(Effect::Allow, "*", "s3:getobject", "b/*")]);
        let d = denote(&p, &al).unwrap();
        assert_eq!(d.cubes().len(), 1);
        assert!(d.contains(&req("alice", "s3:getobject", "b/x")));
        assert!(d.contains(&req("alice", "s3:GetObject", "b/x")));
        assert!(!d.contains(&req("alice", "s3:putobject", "b/x")));
    }

    #[test]
    fn char_outside_alphabet() {
        let al = Arc::new(Alphabet::new("ab:".chars()).unwrap());
        let p = Policy::new(vec![stmt(Effect::Allow, "*", "s3:*", "*")]);
        assert!(denote(&p, &al).unwrap_err().is_char_outside_alphabet());
    }

    /// Every string over `symbols` with length ≤ `max`.
    fn strings(symbols: &[char], max: usize) -> Vec<String> {
        let mut out = vec![String::new()];
        let mut frontier = vec![String::new()];
        for _ in 0..max {
            let mut next = Vec::new();
            for s in &frontier {
                for &c in symbols {
                    let mut t = s.clone();
                    t.push(c);
                    next.push(t);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    #[test]
    fn wildcard_allow_with_deny_agrees_with_evaluate() {
        // actions over a small alphabet that can spell the patterns
        let syms: Vec<char> = "s3:pu".chars().collect();
        let al = Arc::new(Alphabet::new(syms.iter().copied()).unwrap());
        let p = Policy::new(vec![
            stmt(Effect::Allow, "*", "s3:*", "*"),
            stmt(Effect::Deny, "*", "s3:pu", "*"),
        ]);
        let d = denote(&p, &al).unwrap();
        let short = strings(&syms, 1);
        for a in strings(&syms, 6) {
            for pr in &short {
                for rs in &short {
                    let r = req(pr, &a, rs);
                    assert_eq!(d.contains(&r), evaluate(&p, &r).is_allowed(), "{r}");
                }
            }
        }
    }
}
