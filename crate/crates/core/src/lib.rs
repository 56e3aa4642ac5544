//! Access control policy synthesis and verification.
//!
//! * [`policy`]: IAM-subset data model, JSON codec and deny-overrides evaluation.
//! * [`pattern`]: glob patterns as minimal automata with boolean algebra and counting.
//! * [`analyzer`]: policy denotations as request sets, permissiveness comparison.
//! * [`fgdsl`]: the structured fine-grained specification language and its compiler.
//! * [`specgen`]: synthetic request specifications and the ground-truth corpus.
//! * [`synth`]: prompt construction, synthesis backends and policy extraction.
//! * [`harness`]: the three experiment pipelines and their reports.

pub mod analyzer;
pub mod fgdsl;
pub mod harness;
pub mod pattern;
pub mod policy;
pub mod specgen;
pub mod synth;
