use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Outcomes, RowStatus, RunConfig};
use crate::analyzer::{compare_default, Relation};
use crate::specgen::CorpusEntry;
use crate::synth::{build_prompt, synthesize, Backend, PromptKind, PromptSource};

/// Relation read from the synthesized policy's side.
pub fn synth_side_label(r: Relation) -> &'static str {
    match r {
        Relation::Equivalent => "equivalent",
        Relation::FirstStrictlyMore => "synth_more_permissive",
        Relation::SecondStrictlyMore => "truth_more_permissive",
        Relation::Incomparable => "incomparable",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompareRow {
    pub id: String,
    /// `compare(synthesized, ground truth)`; absent when no verdict exists.
    pub relation: Option<Relation>,
    /// Decimal request counts within the bound.
    pub only_in_synth: Option<String>,
    pub only_in_truth: Option<String>,
    pub bound: Option<usize>,
    pub syntactic_valid: bool,
    pub refused: bool,
    #[serde(flatten)]
    pub status: RowStatus,
}

/// One bar per relation, in fixed order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Distribution {
    pub relation: Relation,
    pub label: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RqCompareResult {
    pub experiment: String,
    pub backend: String,
    pub alphabet: String,
    pub rows: Vec<CompareRow>,
    /// Over rows with a verdict; sums to `outcomes.ok`.
    pub distribution: Vec<Distribution>,
    pub outcomes: Outcomes,
}

impl RqCompareResult {
    pub fn count_of(&self, r: Relation) -> usize {
        self.distribution
            .iter()
            .find(|d| d.relation == r)
            .map_or(0, |d| d.count)
    }
}

fn run_one(
    entry: &CorpusEntry,
    kind: PromptKind,
    backend: &dyn Backend,
    cfg: &RunConfig,
) -> CompareRow {
    let row = |status, syntactic_valid, refused| CompareRow {
        id: entry.id.clone(),
        relation: None,
        only_in_synth: None,
        only_in_truth: None,
        bound: None,
        syntactic_valid,
        refused,
        status,
    };
    let prompt = build_prompt(kind, PromptSource::Corpus(entry))
        .expect("description prompt from corpus entry");
    let record = match synthesize(&prompt, backend) {
        Ok(r) => r,
        Err(e) => return row(RowStatus::BackendFailed(e.to_string()), false, false),
    };
    cfg.log(&record);
    let policy = match &record.extracted {
        Ok(p) => p,
        Err(f) => {
            return row(
                RowStatus::ExtractionFailed(f.clone()),
                false,
                record.refused,
            )
        }
    };
    match compare_default(policy, &entry.ground_truth, &cfg.alphabet) {
        Ok(v) => CompareRow {
            relation: Some(v.relation),
            only_in_synth: Some(v.only_in_first.count.to_string()),
            only_in_truth: Some(v.only_in_second.count.to_string()),
            bound: Some(v.bound),
            ..row(RowStatus::Ok, true, record.refused)
        },
        Err(e) => row(
            RowStatus::AnalysisFailed(e.to_string()),
            true,
            record.refused,
        ),
    }
}

fn run(
    experiment: &str,
    kind: PromptKind,
    corpus: &[CorpusEntry],
    backend: &dyn Backend,
    cfg: &RunConfig,
) -> RqCompareResult {
    let mut rows: Vec<CompareRow> = corpus
        .par_iter()
        .map(|e| run_one(e, kind, backend, cfg))
        .collect();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let distribution = Relation::ALL
        .iter()
        .map(|&relation| Distribution {
            relation,
            label: synth_side_label(relation).into(),
            count: rows.iter().filter(|r| r.relation == Some(relation)).count(),
        })
        .collect();
    RqCompareResult {
        experiment: experiment.into(),
        backend: backend.id(),
        alphabet: cfg.alphabet.id(),
        distribution,
        outcomes: Outcomes::tally(rows.iter().map(|r| (&r.status, r.refused))),
        rows,
    }
}

/// Coarse natural-language descriptions against the ground truth.
pub fn run_rq2(corpus: &[CorpusEntry], backend: &dyn Backend, cfg: &RunConfig) -> RqCompareResult {
    run("rq2", PromptKind::CoarseGrained, corpus, backend, cfg)
}

/// Fine-grained structured descriptions against the ground truth.
pub fn run_rq3(corpus: &[CorpusEntry], backend: &dyn Backend, cfg: &RunConfig) -> RqCompareResult {
    run("rq3", PromptKind::FineGrainedSyntax, corpus, backend, cfg)
}
