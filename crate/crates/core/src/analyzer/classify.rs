use serde::{Deserialize, Serialize};

use super::AnalyzerError;
use crate::policy::{evaluate, Decision, Policy, Request};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Allow,
    Deny,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifiedRequest {
    pub request: Request,
    pub expected: Expectation,
    pub decision: Decision,
    pub correct: bool,
}

/// Per-request outcome table for one policy against one specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub rows: Vec<ClassifiedRequest>,
    pub correct: usize,
    pub total: usize,
}

impl Classification {
    pub fn rate(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }

    /// Exact rate as `correct/total`.
    pub fn rate_fraction(&self) -> String {
        format!("{}/{}", self.correct, self.total)
    }

    pub fn misclassified(&self) -> usize {
        self.total - self.correct
    }

    pub fn misclassified_of(&self, expected: Expectation) -> usize {
        self.rows
            .iter()
            .filter(|r| r.expected == expected && !r.correct)
            .count()
    }
}

pub fn classify_requests(
    p: &Policy,
    allowed: &[Request],
    denied: &[Request],
) -> Result<Classification, AnalyzerError> {
    if allowed.is_empty() && denied.is_empty() {
        return Err(AnalyzerError::EmptySpecification);
    }
    let rows: Vec<ClassifiedRequest> = allowed
        .iter()
        .map(|r| (r, Expectation::Allow))
        .chain(denied.iter().map(|r| (r, Expectation::Deny)))
        .map(|(r, expected)| {
            let decision = evaluate(p, r);
            ClassifiedRequest {
                request: r.clone(),
                expected,
                decision,
                correct: decision.is_allowed() == (expected == Expectation::Allow),
            }
        })
        .collect();
    let correct = rows.iter().filter(|r| r.correct).count();
    Ok(Classification {
        total: rows.len(),
        correct,
        rows,
    })
}
