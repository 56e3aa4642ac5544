use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{HarnessError, Rq1Result, RqCompareResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
    Both,
}

/// CSV table: file suffix, header, records.
pub type Table = (&'static str, Vec<&'static str>, Vec<Vec<String>>);

/// A result that can be written as one JSON document plus CSV tables.
pub trait Report: Serialize {
    fn experiment(&self) -> &str;

    fn tables(&self) -> Vec<Table>;

    fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(ToString::to_string).unwrap_or_default()
}

impl Report for Rq1Result {
    fn experiment(&self) -> &str {
        &self.experiment
    }

    fn tables(&self) -> Vec<Table> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.spec_id.clone(),
                    r.seed.to_string(),
                    r.total.to_string(),
                    r.allowed.to_string(),
                    r.denied.to_string(),
                    r.misclassified.to_string(),
                    r.misclassified_allowed.to_string(),
                    r.misclassified_denied.to_string(),
                    r.rate.to_string(),
                    r.syntactic_valid.to_string(),
                    r.refused.to_string(),
                    r.status.tag().to_string(),
                    r.status.detail(),
                ]
            })
            .collect();
        vec![(
            "rows",
            vec![
                "spec_id",
                "seed",
                "total",
                "allowed",
                "denied",
                "misclassified",
                "misclassified_allowed",
                "misclassified_denied",
                "rate",
                "syntactic_valid",
                "refused",
                "status",
                "detail",
            ],
            rows,
        )]
    }
}

impl Report for RqCompareResult {
    fn experiment(&self) -> &str {
        &self.experiment
    }

    fn tables(&self) -> Vec<Table> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.id.clone(),
                    r.relation.map(|x| x.tag().to_string()).unwrap_or_default(),
                    opt(&r.only_in_synth),
                    opt(&r.only_in_truth),
                    opt(&r.bound),
                    r.syntactic_valid.to_string(),
                    r.refused.to_string(),
                    r.status.tag().to_string(),
                    r.status.detail(),
                ]
            })
            .collect();
        let mut dist: Vec<Vec<String>> = self
            .distribution
            .iter()
            .map(|d| vec![d.label.clone(), d.count.to_string()])
            .collect();
        let o = &self.outcomes;
        dist.push(vec![
            "no_verdict".into(),
            (o.extraction_failed + o.backend_failed + o.analysis_failed).to_string(),
        ]);
        vec![
            (
                "rows",
                vec![
                    "id",
                    "relation",
                    "only_in_synth",
                    "only_in_truth",
                    "bound",
                    "syntactic_valid",
                    "refused",
                    "status",
                    "detail",
                ],
                rows,
            ),
            ("distribution", vec!["outcome", "count"], dist),
        ]
    }
}

fn io_failure(path: &Path, e: impl ToString) -> HarnessError {
    HarnessError::IoFailure {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn csv_text(header: &[&str], records: &[Vec<String>]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in records {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

/// Writes `<experiment>.json` and/or `<experiment>_<table>.csv` into `dir`
/// and returns the paths written.
pub fn emit_report(
    report: &dyn ReportDyn,
    dir: &Path,
    format: ReportFormat,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let mut written = Vec::new();
    if format != ReportFormat::Csv {
        let path = dir.join(format!("{}.json", report.experiment_name()));
        fs::write(&path, report.json()).map_err(|e| io_failure(&path, e))?;
        written.push(path);
    }
    if format != ReportFormat::Json {
        for (suffix, header, records) in report.csv_tables() {
            let path = dir.join(format!("{}_{suffix}.csv", report.experiment_name()));
            let bytes = csv_text(&header, &records).map_err(|e| io_failure(&path, e))?;
            fs::write(&path, bytes).map_err(|e| io_failure(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Object-safe view of [`Report`].
pub trait ReportDyn {
    fn experiment_name(&self) -> &str;
    fn json(&self) -> String;
    fn csv_tables(&self) -> Vec<Table>;
}

impl<T: Report> ReportDyn for T {
    fn experiment_name(&self) -> &str {
        self.experiment()
    }
    fn json(&self) -> String {
        self.to_json()
    }
    fn csv_tables(&self) -> Vec<Table> {
        self.tables()
    }
}
