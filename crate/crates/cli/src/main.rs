use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use policy_synth::analyzer::{classify_requests, compare, default_bound, denote, Relation};
use policy_synth::fgdsl::{compile_fgspec, parse_fgspec};
use policy_synth::harness::{emit_report, run_rq1, run_rq2, run_rq3, ReportFormat, RunConfig};
use policy_synth::pattern::Alphabet;
use policy_synth::policy::{parse_policy, serialize_policy_pretty, Policy};
use policy_synth::specgen::{
    generate_request_spec, load_corpus, load_corpus_entry, validate_corpus, GenParams, RequestSpec,
};
use policy_synth::synth::{
    build_prompt, synthesize, Backend, HttpBackend, OracleBackend, Prompt, PromptKind,
    PromptSource, ReplayBackend, TranscriptSink,
};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "policy-synth",
    version,
    about = "Synthesize and verify IAM access-control policies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded concrete-request specification.
    GenSpec {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON file overriding the generation parameters.
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Compile a fine-grained specification to a policy.
    CompileDsl {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        account_id: Option<String>,
    },
    /// Classify a request specification against a policy.
    Eval {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        spec: PathBuf,
    },
    /// Compare the permissiveness of two policies.
    Compare {
        #[arg(long)]
        p1: PathBuf,
        #[arg(long)]
        p2: PathBuf,
        /// Maximum field length counted; defaults to longest pattern + 5.
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Count the requests a policy allows up to a field length bound.
    Count {
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Build a synthesis prompt from a request spec or corpus entry.
    Prompt {
        /// concrete, coarse or fine-grained
        #[arg(long)]
        kind: String,
        /// Request spec JSON (concrete) or corpus entry directory.
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Send one prompt to a backend and extract the policy.
    Synthesize {
        /// Prompt JSON written by `prompt`.
        #[arg(long)]
        prompt: PathBuf,
        #[command(flatten)]
        backend: BackendArgs,
        /// Corpus used by the oracle for coarse prompts.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Concrete-request experiment over seeded specifications.
    Rq1 {
        #[command(flatten)]
        backend: BackendArgs,
        /// Seed count (`100`, meaning 1..=100), range (`5-9`) or list (`1,4,7`).
        #[arg(long, default_value = "100")]
        seeds: String,
        #[command(flatten)]
        out: ReportArgs,
    },
    /// Coarse-description experiment over the corpus.
    Rq2 {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        out: ReportArgs,
    },
    /// Fine-grained-description experiment over the corpus.
    Rq3 {
        #[command(flatten)]
        backend: BackendArgs,
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        out: ReportArgs,
    },
    /// Check that every corpus spec compiles to its ground truth.
    ValidateCorpus {
        #[arg(long)]
        corpus: PathBuf,
    },
}

#[derive(Args)]
struct BackendArgs {
    /// oracle, replay:<dir> or http
    #[arg(long, default_value = "oracle")]
    backend: String,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    report_dir: PathBuf,
    /// Append every model exchange to this JSONL file.
    #[arg(long)]
    transcript: Option<PathBuf>,
}

/// Errors in inputs or settings, reported with exit code 2.
#[derive(Debug)]
struct ConfigError(anyhow::Error);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| ConfigError(e).into())
}

fn read(path: &Path) -> Result<String> {
    config(fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())))
}

fn read_policy(path: &Path) -> Result<Policy> {
    let text = read(path)?;
    config(parse_policy(&text).with_context(|| format!("{}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn backend(args: &BackendArgs, corpus: Option<&Path>) -> Result<Box<dyn Backend>> {
    let spec = args.backend.as_str();
    if spec == "oracle" {
        let mut oracle = OracleBackend::new();
        if let Some(dir) = corpus {
            oracle = oracle.with_corpus(&config(load_corpus(dir).map_err(Into::into))?);
        }
        return Ok(Box::new(oracle));
    }
    if let Some(dir) = spec.strip_prefix("replay:") {
        if !Path::new(dir).is_dir() {
            return config(Err(anyhow!("replay directory {dir} does not exist")));
        }
        return Ok(Box::new(ReplayBackend::new(dir)));
    }
    if spec == "http" {
        return config(
            HttpBackend::from_env()
                .map(|b| Box::new(b) as Box<dyn Backend>)
                .map_err(Into::into),
        );
    }
    config(Err(anyhow!(
        "unknown backend {spec:?}; expected oracle, replay:<dir> or http"
    )))
}

fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<u64>()
            .with_context(|| format!("bad seed {s:?}"))
    };
    let seeds = if text.contains(',') {
        text.split(',').map(num).collect::<Result<_>>()?
    } else if let Some((a, b)) = text.split_once('-') {
        (num(a)?..=num(b)?).collect()
    } else {
        (1..=num(text)?).collect::<Vec<_>>()
    };
    if seeds.is_empty() {
        bail!("no seeds in {text:?}");
    }
    Ok(seeds)
}

fn run_config(out: &ReportArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &out.transcript {
        let sink =
            TranscriptSink::create(path).with_context(|| format!("cannot open {}", path.display()));
        cfg.transcript = Some(Arc::new(config(sink)?));
    }
    Ok(cfg)
}

fn emit(report: &dyn policy_synth::harness::ReportDyn, out: &ReportArgs) -> Result<()> {
    for p in emit_report(report, &out.report_dir, ReportFormat::Both)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let alphabet = Arc::new(Alphabet::iam_default());
    match cli.command {
        Command::GenSpec { seed, out, params } => {
            let params = match params {
                Some(p) => {
                    config(serde_json::from_str::<GenParams>(&read(&p)?).map_err(Into::into))?
                }
                None => GenParams::default(),
            };
            let spec = config(generate_request_spec(seed, &params).map_err(Into::into))?;
            write_or_print(out.as_deref(), &(spec.to_json() + "\n"))?;
        }
        Command::CompileDsl {
            input,
            out,
            account_id,
        } => {
            let mut spec = config(parse_fgspec(&read(&input)?).map_err(Into::into))?;
            if let Some(id) = account_id {
                spec = spec.with_account_id(id);
            }
            write_or_print(
                out.as_deref(),
                &(serialize_policy_pretty(&compile_fgspec(&spec)) + "\n"),
            )?;
        }
        Command::Eval { policy, spec } => {
            let policy = read_policy(&policy)?;
            let spec = config(RequestSpec::from_json(&read(&spec)?).map_err(Into::into))?;
            let c = config(
                classify_requests(&policy, &spec.allowed, &spec.denied).map_err(Into::into),
            )?;
            let wrong: Vec<_> = c
                .rows
                .iter()
                .filter(|r| !r.correct)
                .map(|r| json!({"request": r.request, "expected": r.expected, "decision": r.decision}))
                .collect();
            print_json(&json!({
                "correct": c.correct,
                "total": c.total,
                "rate": c.rate(),
                "fraction": c.rate_fraction(),
                "misclassified": wrong,
            }));
        }
        Command::Compare { p1, p2, bound } => {
            let (a, b) = (read_policy(&p1)?, read_policy(&p2)?);
            let bound = bound.unwrap_or_else(|| default_bound(&a, &b));
            let v = config(compare(&a, &b, &alphabet, bound).map_err(Into::into))?;
            print_json(&v);
            if v.relation != Relation::Equivalent {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Count { policy, bound } => {
            let p = read_policy(&policy)?;
            let bound = bound.unwrap_or_else(|| default_bound(&p, &p));
            let set = config(denote(&p, &alphabet).map_err(Into::into))?;
            let c = set.count_upto(bound)?;
            print_json(
                &json!({"allowed": c.count.to_string(), "bound": bound, "alphabet": alphabet.id()}),
            );
        }
        Command::Prompt { kind, source, out } => {
            let kind = config(
                PromptKind::parse(&kind).ok_or_else(|| anyhow!("unknown prompt kind {kind:?}")),
            )?;
            let prompt = if kind == PromptKind::ConcreteRequest {
                let spec = config(RequestSpec::from_json(&read(&source)?).map_err(Into::into))?;
                build_prompt(kind, PromptSource::Requests(&spec))?
            } else {
                let entry = config(load_corpus_entry(&source).map_err(Into::into))?;
                build_prompt(kind, PromptSource::Corpus(&entry))?
            };
            let text = serde_json::to_string_pretty(&prompt)? + "\n";
            write_or_print(out.as_deref(), &text)?;
        }
        Command::Synthesize {
            prompt,
            backend: b,
            corpus,
        } => {
            let prompt: Prompt = config(serde_json::from_str(&read(&prompt)?).map_err(Into::into))?;
            let backend = backend(&b, corpus.as_deref())?;
            let record =
                synthesize(&prompt, backend.as_ref()).map_err(|e| ConfigError(e.into()))?;
            let ok = record.extracted.is_ok();
            print_json(&record);
            if !ok {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Rq1 {
            backend: b,
            seeds,
            out,
        } => {
            let seeds = config(parse_seeds(&seeds))?;
            let backend = backend(&b, None)?;
            let cfg = run_config(&out)?;
            let r = config(
                run_rq1(&seeds, &GenParams::default(), backend.as_ref(), &cfg).map_err(Into::into),
            )?;
            emit(&r, &out)?;
            eprintln!("mean rate {:.4} over {} specs", r.mean_rate, r.rows.len());
        }
        Command::Rq2 {
            backend: b,
            corpus,
            out,
        } => {
            let entries = config(load_corpus(&corpus).map_err(Into::into))?;
            let backend = backend(&b, Some(&corpus))?;
            let r = run_rq2(&entries, backend.as_ref(), &run_config(&out)?);
            emit(&r, &out)?;
            eprintln!(
                "{}/{} equivalent",
                r.count_of(Relation::Equivalent),
                r.rows.len()
            );
        }
        Command::Rq3 {
            backend: b,
            corpus,
            out,
        } => {
            let entries = config(load_corpus(&corpus).map_err(Into::into))?;
            let backend = backend(&b, None)?;
            let r = run_rq3(&entries, backend.as_ref(), &run_config(&out)?);
            emit(&r, &out)?;
            eprintln!(
                "{}/{} equivalent",
                r.count_of(Relation::Equivalent),
                r.rows.len()
            );
        }
        Command::ValidateCorpus { corpus } => {
            let entries = config(load_corpus(&corpus).map_err(Into::into))?;
            match validate_corpus(&entries, &alphabet) {
                Ok(report) => {
                    print_json(&report);
                    eprintln!("{} entries valid", report.rows.len());
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(1));
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<ConfigError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
