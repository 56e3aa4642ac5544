//! The three experiment pipelines and their reports.
//!
//! Rows are computed in parallel and then sorted, so a report depends only
//! on its inputs and the backend's answers. Timestamps and latencies go to
//! the optional transcript, never into reports.

mod compare;
mod report;
mod rq1;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use compare::{run_rq2, run_rq3, synth_side_label, CompareRow, Distribution, RqCompareResult};
pub use report::{emit_report, Report, ReportDyn, ReportFormat, Table};
pub use rq1::{run_rq1, Rq1Result, Rq1Row};

use crate::pattern::Alphabet;
use crate::synth::{ExtractionFailure, SynthesisRecord, TranscriptSink};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("cannot write {path}: {message}")]
    IoFailure { path: String, message: String },
}

/// Shared settings for a batch run.
#[derive(Clone)]
pub struct RunConfig {
    /// Universe used for permissiveness counting.
    pub alphabet: Arc<Alphabet>,
    /// Every synthesis record is appended here when set.
    pub transcript: Option<Arc<TranscriptSink>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alphabet: Arc::new(Alphabet::iam_default()),
            transcript: None,
        }
    }
}

impl RunConfig {
    fn log(&self, record: &SynthesisRecord) {
        if let Some(t) = &self.transcript {
            if let Err(e) = t.append(record) {
                tracing::warn!(error = %e, "could not append to transcript");
            }
        }
    }
}

/// What happened to one row of an experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// The response held no usable policy.
    ExtractionFailed(ExtractionFailure),
    /// The backend could not be reached; no response exists.
    BackendFailed(String),
    /// A policy was extracted but could not be analyzed.
    AnalysisFailed(String),
}

impl RowStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::ExtractionFailed(f) => f.tag(),
            RowStatus::BackendFailed(_) => "backend_failed",
            RowStatus::AnalysisFailed(_) => "analysis_failed",
        }
    }

    pub fn detail(&self) -> String {
        match self {
            RowStatus::Ok => String::new(),
            RowStatus::ExtractionFailed(f) => f.to_string(),
            RowStatus::BackendFailed(m) | RowStatus::AnalysisFailed(m) => m.clone(),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }
}

/// Counts of row outcomes. `ok + extraction_failed + backend_failed +
/// analysis_failed == attempted`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcomes {
    pub attempted: usize,
    pub ok: usize,
    pub extraction_failed: usize,
    pub backend_failed: usize,
    pub analysis_failed: usize,
    pub refused: usize,
}

impl Outcomes {
    fn tally<'a>(rows: impl Iterator<Item = (&'a RowStatus, bool)>) -> Self {
        let mut o = Outcomes::default();
        for (status, refused) in rows {
            o.attempted += 1;
            o.refused += usize::from(refused);
            match status {
                RowStatus::Ok => o.ok += 1,
                RowStatus::ExtractionFailed(_) => o.extraction_failed += 1,
                RowStatus::BackendFailed(_) => o.backend_failed += 1,
                RowStatus::AnalysisFailed(_) => o.analysis_failed += 1,
            }
        }
        o
    }
}
