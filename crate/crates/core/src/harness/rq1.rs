use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HarnessError, Outcomes, RowStatus, RunConfig};
use crate::analyzer::{classify_requests, Expectation};
use crate::specgen::{generate_request_spec, GenParams, RequestSpec};
use crate::synth::{build_prompt, synthesize, Backend, PromptKind, PromptSource};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq1Row {
    pub spec_id: String,
    pub seed: u64,
    pub total: usize,
    pub allowed: usize,
    pub denied: usize,
    /// Rows without an extracted policy count every request as misclassified.
    pub misclassified: usize,
    pub misclassified_allowed: usize,
    pub misclassified_denied: usize,
    pub rate: f64,
    pub syntactic_valid: bool,
    pub refused: bool,
    #[serde(flatten)]
    pub status: RowStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rq1Result {
    pub experiment: String,
    pub backend: String,
    pub rows: Vec<Rq1Row>,
    /// Arithmetic mean of per-spec rates.
    pub mean_rate: f64,
    /// Correct requests over all requests, pooled across specs.
    pub request_weighted_rate: f64,
    /// Mean rate over rows whose policy was extracted.
    pub mean_rate_extracted: Option<f64>,
    pub outcomes: Outcomes,
}

fn run_one(spec: &RequestSpec, backend: &dyn Backend, cfg: &RunConfig) -> Rq1Row {
    let total = spec.total();
    let failed = |status: RowStatus, refused: bool| Rq1Row {
        spec_id: spec.id(),
        seed: spec.seed,
        total,
        allowed: spec.allowed.len(),
        denied: spec.denied.len(),
        misclassified: total,
        misclassified_allowed: spec.allowed.len(),
        misclassified_denied: spec.denied.len(),
        rate: 0.0,
        syntactic_valid: false,
        refused,
        status,
    };
    let prompt = build_prompt(PromptKind::ConcreteRequest, PromptSource::Requests(spec))
        .expect("concrete prompt from request spec");
    let record = match synthesize(&prompt, backend) {
        Ok(r) => r,
        Err(e) => return failed(RowStatus::BackendFailed(e.to_string()), false),
    };
    cfg.log(&record);
    let policy = match &record.extracted {
        Ok(p) => p,
        Err(f) => return failed(RowStatus::ExtractionFailed(f.clone()), record.refused),
    };
    match classify_requests(policy, &spec.allowed, &spec.denied) {
        Ok(c) => Rq1Row {
            spec_id: spec.id(),
            seed: spec.seed,
            total,
            allowed: spec.allowed.len(),
            denied: spec.denied.len(),
            misclassified: c.misclassified(),
            misclassified_allowed: c.misclassified_of(Expectation::Allow),
            misclassified_denied: c.misclassified_of(Expectation::Deny),
            rate: c.rate(),
            syntactic_valid: true,
            refused: record.refused,
            status: RowStatus::Ok,
        },
        Err(e) => {
            let mut row = failed(RowStatus::AnalysisFailed(e.to_string()), record.refused);
            row.syntactic_valid = true;
            row
        }
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Concrete-request experiment: one generated specification per seed.
/// Individual failures become rows; only bad parameters abort the run.
pub fn run_rq1(
    seeds: &[u64],
    params: &GenParams,
    backend: &dyn Backend,
    cfg: &RunConfig,
) -> Result<Rq1Result, HarnessError> {
    params
        .validate()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let mut rows: Vec<Rq1Row> = seeds
        .par_iter()
        .map(|&seed| {
            let spec = generate_request_spec(seed, params)
                .map_err(|e| HarnessError::Config(format!("seed {seed}: {e}")))?;
            Ok(run_one(&spec, backend, cfg))
        })
        .collect::<Result<_, HarnessError>>()?;
    rows.sort_by_key(|r| r.seed);

    let total: usize = rows.iter().map(|r| r.total).sum();
    let misclassified: usize = rows.iter().map(|r| r.misclassified).sum();
    Ok(Rq1Result {
        experiment: "rq1".into(),
        backend: backend.id(),
        mean_rate: mean(rows.iter().map(|r| r.rate)).unwrap_or(0.0),
        request_weighted_rate: if total == 0 {
            0.0
        } else {
            (total - misclassified) as f64 / total as f64
        },
        mean_rate_extracted: mean(rows.iter().filter(|r| r.syntactic_valid).map(|r| r.rate)),
        outcomes: Outcomes::tally(rows.iter().map(|r| (&r.status, r.refused))),
        rows,
    })
}
