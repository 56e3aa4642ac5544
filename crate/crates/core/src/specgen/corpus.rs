use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::SpecGenError;
use crate::analyzer::{compare_default, ComparisonVerdict, Relation};
use crate::fgdsl::{compile_fgspec, parse_fgspec, FgSpec};
use crate::pattern::Alphabet;
use crate::policy::{parse_policy, Policy};

pub const POLICY_FILE: &str = "policy.json";
pub const COARSE_FILE: &str = "coarse.txt";
pub const SPEC_FILE: &str = "spec.fgs";
pub const META_FILE: &str = "meta.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    S3,
    Ec2,
    Iam,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Meta {
    id: String,
    tags: Vec<Tag>,
}

/// Ground-truth policy with its coarse and fine-grained descriptions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: String,
    pub ground_truth: Policy,
    pub coarse_description: String,
    pub fg_spec: FgSpec,
    pub tags: Vec<Tag>,
}

/// Loads `<dir>/<id>/{policy.json,coarse.txt,spec.fgs,meta.json}` for every
/// subdirectory, sorted by directory name.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, SpecGenError> {
    if !dir.is_dir() {
        return Err(SpecGenError::MissingFile(dir.to_path_buf()));
    }
    let mut subdirs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| SpecGenError::Io(dir.to_path_buf(), e.to_string()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    subdirs.iter().map(|d| load_corpus_entry(d)).collect()
}

fn read(path: PathBuf) -> Result<String, SpecGenError> {
    if !path.is_file() {
        return Err(SpecGenError::MissingFile(path));
    }
    fs::read_to_string(&path).map_err(|e| SpecGenError::Io(path, e.to_string()))
}

/// Loads a single entry directory.
pub fn load_corpus_entry(dir: &Path) -> Result<CorpusEntry, SpecGenError> {
    let dir_name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let invalid = |what: String| SpecGenError::InvalidEntry {
        id: dir_name.clone(),
        detail: what,
    };
    let meta: Meta = serde_json::from_str(&read(dir.join(META_FILE))?)
        .map_err(|e| invalid(format!("{META_FILE}: {e}")))?;
    if meta.id != dir_name {
        return Err(invalid(format!(
            "{META_FILE} id {:?} does not match directory name",
            meta.id
        )));
    }
    let ground_truth = parse_policy(&read(dir.join(POLICY_FILE))?)
        .map_err(|e| invalid(format!("{POLICY_FILE}: {e}")))?;
    let fg_spec = parse_fgspec(&read(dir.join(SPEC_FILE))?)
        .map_err(|e| invalid(format!("{SPEC_FILE}: {e}")))?;
    let coarse_description = read(dir.join(COARSE_FILE))?.trim().to_string();
    Ok(CorpusEntry {
        id: meta.id,
        ground_truth,
        coarse_description,
        fg_spec,
        tags: meta.tags,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub id: String,
    pub verdict: ComparisonVerdict,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
}

/// Admits the corpus only if every compiled fine-grained spec is
/// equivalent to its ground-truth policy.
pub fn validate_corpus(
    entries: &[CorpusEntry],
    alphabet: &Arc<Alphabet>,
) -> Result<ValidationReport, SpecGenError> {
    let mut report = ValidationReport::default();
    for e in entries {
        let compiled = compile_fgspec(&e.fg_spec);
        let verdict = compare_default(&compiled, &e.ground_truth, alphabet).map_err(|err| {
            SpecGenError::ValidationFailure {
                id: e.id.clone(),
                detail: err.to_string(),
            }
        })?;
        if verdict.relation != Relation::Equivalent {
            return Err(SpecGenError::ValidationFailure {
                id: e.id.clone(),
                detail: format!(
                    "compiled spec is {} relative to the ground truth ({} requests only in spec, {} only in ground truth, bound {})",
                    verdict.relation.tag(),
                    verdict.only_in_first.count,
                    verdict.only_in_second.count,
                    verdict.bound
                ),
            });
        }
        report.rows.push(ValidationRow {
            id: e.id.clone(),
            verdict,
        });
    }
    Ok(report)
}
