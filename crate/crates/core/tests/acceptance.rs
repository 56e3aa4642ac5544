//! Acceptance suite. Runs every criterion in order, prints one PASS/FAIL
//! line each and exits non-zero if any failed.

mod common;

use std::collections::HashSet;
use std::fs;
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::{classes, random_policy, small_alphabet, strings_upto, workspace_root, SMALL};
use num_bigint::BigUint;
use policy_synth::analyzer::{compare, compare_default, denote, Relation};
use policy_synth::fgdsl::{compile_fgspec, parse_fgspec};
use policy_synth::harness::{run_rq1, run_rq2, run_rq3, Report, RunConfig};
use policy_synth::pattern::{count_upto, Alphabet, Dfa};
use policy_synth::policy::{evaluate, glob_match, normalize_field, Field, Policy, Request};
use policy_synth::specgen::{
    generate_request_spec, load_corpus, CorpusEntry, GenParams, RequestSpec,
};
use policy_synth::synth::{
    build_prompt, ConstantBackend, DenyDroppingBackend, OracleBackend, PromptKind, PromptSource,
    ReplayBackend,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Probe<'a> = Box<dyn Fn(&str) -> bool + 'a>;
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn request(p: &str, a: &str, r: &str) -> Request {
    Request {
        principal: p.into(),
        action: a.into(),
        resource: r.into(),
    }
}

fn corpus() -> Vec<CorpusEntry> {
    load_corpus(&workspace_root().join("corpus")).expect("bundled corpus loads")
}

// 1 ------------------------------------------------------------------------

fn denotation_matches_evaluator() -> Outcome {
    let al = small_alphabet();
    let strings = strings_upto(&SMALL, 4);
    let short = strings_upto(&SMALL, 3);
    let per_policy = (strings.len() as u64).pow(3);
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC1);
    let mut checked = 0u64;
    let mut literal = 0u64;
    for i in 0..1000 {
        let p = random_policy(&mut rng, &SMALL, 3, 4);
        let set = denote(&p, &al).map_err(|e| format!("policy {i}: {e}"))?;
        let check = |r: &Request| {
            let d = set.contains(r);
            let e = evaluate(&p, r).is_allowed();
            ensure(d == e, || {
                format!(
                    "policy {i} {:?}: denote={d} evaluate={e} on {r:?}",
                    policy_synth::policy::serialize_policy(&p)
                )
            })
        };

        // class-partitioned exhaustive check over length <= 4
        let mut parts = Vec::new();
        for f in Field::ALL {
            let mut probes: Vec<Probe<'_>> = Vec::new();
            for s in &p.statements {
                let m = s.matcher(f);
                probes.push(Box::new(move |x: &str| m.matches(f, x)));
            }
            for c in set.cubes() {
                let dfa = c.field(f);
                probes.push(Box::new(move |x: &str| dfa.accepts(&normalize_field(f, x))));
            }
            let refs: Vec<&dyn Fn(&str) -> bool> = probes.iter().map(|b| b.as_ref()).collect();
            parts.push(classes(&strings, &refs));
        }
        let mut weight = 0u64;
        for (pr, wp) in &parts[0] {
            for (ac, wa) in &parts[1] {
                for (re, wr) in &parts[2] {
                    check(&request(pr, ac, re))?;
                    weight += wp * wa * wr;
                }
            }
        }
        ensure(weight == per_policy, || {
            format!("policy {i}: classes cover {weight} of {per_policy}")
        })?;
        checked += weight;

        // plain enumeration for a subset, at length <= 3
        if i < 25 {
            for pr in &short {
                for ac in &short {
                    for re in &short {
                        check(&request(pr, ac, re))?;
                        literal += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "1000 policies, {checked} requests agree ({literal} by plain enumeration)"
    ))
}

// 2 ------------------------------------------------------------------------

struct Brute {
    only_first: u64,
    only_second: u64,
}

fn field_part<'a>(
    p1: &Policy,
    p2: &Policy,
    f: Field,
    strings: &'a [String],
    literal: bool,
) -> Vec<(&'a str, u64)> {
    if literal {
        return strings.iter().map(|s| (s.as_str(), 1)).collect();
    }
    let ms: Vec<_> = p1
        .statements
        .iter()
        .chain(&p2.statements)
        .map(|s| s.matcher(f))
        .collect();
    let probes: Vec<Probe<'_>> = ms
        .iter()
        .map(|&m| Box::new(move |x: &str| m.matches(f, x)) as Box<dyn Fn(&str) -> bool>)
        .collect();
    let refs: Vec<&dyn Fn(&str) -> bool> = probes.iter().map(|b| b.as_ref()).collect();
    classes(strings, &refs)
}

/// Difference counts by evaluating both policies on every request with
/// field lengths <= 4; the action field ranges over case-folded strings.
fn brute_compare(p1: &Policy, p2: &Policy, literal: bool) -> Brute {
    let all = strings_upto(&SMALL, 4);
    let folded: Vec<String> = all
        .iter()
        .filter(|s| !s.chars().any(|c| c.is_ascii_uppercase()))
        .cloned()
        .collect();
    let ps = field_part(p1, p2, Field::Principal, &all, literal);
    let acs = field_part(p1, p2, Field::Action, &folded, literal);
    let rs = field_part(p1, p2, Field::Resource, &all, literal);
    let mut b = Brute {
        only_first: 0,
        only_second: 0,
    };
    for (pr, wp) in &ps {
        for (ac, wa) in &acs {
            for (re, wr) in &rs {
                let r = request(pr, ac, re);
                let (x, y) = (evaluate(p1, &r).is_allowed(), evaluate(p2, &r).is_allowed());
                let w = wp * wa * wr;
                if x && !y {
                    b.only_first += w;
                }
                if y && !x {
                    b.only_second += w;
                }
            }
        }
    }
    b
}

fn compare_matches_brute_force() -> Outcome {
    let al = small_alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let mut tally = [0usize; 4];
    let mut literal = 0;
    for i in 0..500 {
        let p1 = random_policy(&mut rng, &SMALL, 3, 4);
        let p2 = random_policy(&mut rng, &SMALL, 3, 4);
        let v = compare(&p1, &p2, &al, 4).map_err(|e| format!("pair {i}: {e}"))?;
        let use_literal = i < 8;
        let b = brute_compare(&p1, &p2, use_literal);
        literal += usize::from(use_literal);
        let expected = Relation::from_differences(b.only_first > 0, b.only_second > 0);
        ensure(
            v.relation == expected
                && v.only_in_first.count == BigUint::from(b.only_first)
                && v.only_in_second.count == BigUint::from(b.only_second),
            || {
                format!(
                    "pair {i}: compare gave {:?} ({}, {}), enumeration gave {expected:?} ({}, {})",
                    v.relation,
                    v.only_in_first.count,
                    v.only_in_second.count,
                    b.only_first,
                    b.only_second
                )
            },
        )?;
        tally[Relation::ALL.iter().position(|&r| r == v.relation).unwrap()] += 1;
    }
    Ok(format!(
        "500 pairs exact (equivalent {}, first more {}, second more {}, incomparable {}; {literal} by plain enumeration)",
        tally[0], tally[1], tally[2], tally[3]
    ))
}

// 3 ------------------------------------------------------------------------

fn counting_matches_enumeration() -> Outcome {
    let al = Arc::new(Alphabet::new(['a', 'b']).unwrap());
    let patterns = strings_upto(&['a', 'b', '*', '?'], 4);
    let strings = strings_upto(&['a', 'b'], 6);
    for p in &patterns {
        let dfa = Dfa::compile_glob(p, Arc::clone(&al)).map_err(|e| e.to_string())?;
        for k in 0..=6 {
            let expected = strings
                .iter()
                .filter(|s| s.len() <= k && glob_match(p, s))
                .count();
            let got = count_upto(&dfa, k).count;
            ensure(got == BigUint::from(expected), || {
                format!("pattern {p:?} k={k}: {got} != {expected}")
            })?;
        }
    }
    for symbols in [&['a', 'b'][..], &['a', 'b', 'c'][..]] {
        let al = Arc::new(Alphabet::new(symbols.iter().copied()).unwrap());
        let n = BigUint::from(symbols.len());
        for k in 0..=10u32 {
            let closed: BigUint = (0..=k).map(|i| n.pow(i)).sum();
            let got = count_upto(&Dfa::universal(Arc::clone(&al)), k as usize).count;
            ensure(got == closed, || {
                format!("|A|={} k={k}: {got} != {closed}", symbols.len())
            })?;
        }
    }
    Ok(format!(
        "{} patterns x k<=6 exact, closed forms hold",
        patterns.len()
    ))
}

// 4 ------------------------------------------------------------------------

fn dsl_oracle_loop() -> Outcome {
    let entries = corpus();
    ensure(entries.len() >= 12, || {
        format!("corpus has only {} entries", entries.len())
    })?;
    let r = run_rq3(&entries, &OracleBackend::new(), &RunConfig::default());
    let eq = r.count_of(Relation::Equivalent);
    ensure(
        eq == entries.len() && r.outcomes.ok == entries.len(),
        || format!("{eq}/{} equivalent: {:?}", entries.len(), r.outcomes),
    )?;
    Ok(format!("{eq}/{} corpus entries equivalent", entries.len()))
}

// 5 ------------------------------------------------------------------------

fn golden(name: &str, actual: &str) -> Result<(), String> {
    let path = workspace_root().join("crates/core/tests/golden").join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, actual).map_err(|e| e.to_string())?;
    }
    let expected = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure(expected == actual, || {
        format!("{name} differs from the golden file")
    })
}

fn rq1_controls() -> Outcome {
    let seeds: Vec<u64> = (1..=20).collect();
    let params = GenParams::default();
    let cfg = RunConfig::default();
    let perfect =
        run_rq1(&seeds, &params, &OracleBackend::new(), &cfg).map_err(|e| e.to_string())?;
    ensure(perfect.mean_rate == 1.0, || {
        format!("control mean rate {}", perfect.mean_rate)
    })?;
    let mutant = run_rq1(
        &seeds,
        &params,
        &DenyDroppingBackend::new(OracleBackend::new().broad()),
        &cfg,
    )
    .map_err(|e| e.to_string())?;
    ensure(mutant.mean_rate < 1.0, || "mutant scored 1.0".into())?;
    for row in &mutant.rows {
        ensure(
            row.misclassified_allowed == 0 && row.misclassified == row.misclassified_denied,
            || format!("{}: mutant failures outside the denied list", row.spec_id),
        )?;
    }

    let fixtures = workspace_root().join("fixtures/replay");
    let entries = corpus();
    let replay_seeds: Vec<u64> = (1..=12).collect();
    let run = || -> Result<[String; 3], String> {
        let r1 = run_rq1(
            &replay_seeds,
            &params,
            &ReplayBackend::new(fixtures.join("rq1")),
            &cfg,
        )
        .map_err(|e| e.to_string())?;
        let r2 = run_rq2(&entries, &ReplayBackend::new(fixtures.join("rq2")), &cfg);
        let r3 = run_rq3(&entries, &ReplayBackend::new(fixtures.join("rq3")), &cfg);
        Ok([r1.to_json(), r2.to_json(), r3.to_json()])
    };
    let first = run()?;
    ensure(run()? == first, || {
        "replay reports differ between runs".into()
    })?;
    for (name, json) in ["rq1_replay.json", "rq2_replay.json", "rq3_replay.json"]
        .iter()
        .zip(&first)
    {
        golden(name, json)?;
    }
    Ok(format!(
        "control 1.0, mutant {:.4} (denied-only failures), replay reports byte-stable",
        mutant.mean_rate
    ))
}

// 6 ------------------------------------------------------------------------

fn spec_generation_bounds() -> Outcome {
    let params = GenParams::default();
    for seed in 0..1000 {
        let s = generate_request_spec(seed, &params).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure((30..=150).contains(&s.allowed.len()), || {
            format!("seed {seed}: {} allowed", s.allowed.len())
        })?;
        ensure((5..=20).contains(&s.denied.len()), || {
            format!("seed {seed}: {} denied", s.denied.len())
        })?;
        let allowed: HashSet<&Request> = s.allowed.iter().collect();
        let denied: HashSet<&Request> = s.denied.iter().collect();
        ensure(
            allowed.len() == s.allowed.len() && denied.len() == s.denied.len(),
            || format!("seed {seed}: duplicate requests"),
        )?;
        ensure(allowed.is_disjoint(&denied), || {
            format!("seed {seed}: allowed and denied overlap")
        })?;
    }
    Ok("1000 specs within bounds, disjoint".into())
}

// 7 ------------------------------------------------------------------------

fn prompt_fidelity() -> Outcome {
    let spec = RequestSpec {
        seed: 0,
        params: GenParams::default(),
        allowed: vec![request(
            "alice",
            "s3:PutObjectAcl",
            "mybucket/backups/data/file8.txt",
        )],
        denied: vec![request(
            "bob",
            "s3:DeleteObject",
            "mybucket/backups/data/file8.txt",
        )],
    };
    let fg_spec =
        parse_fgspec("ALLOW user:alice READ bucket:public-bucket/\n").map_err(|e| e.to_string())?;
    let entry = CorpusEntry {
        id: "alice-public-read".into(),
        ground_truth: compile_fgspec(&fg_spec),
        coarse_description:
            "Requests by Alice to read objects in the public bucket should be allowed.".into(),
        fg_spec,
        tags: vec![],
    };
    let cases = [
        (
            build_prompt(PromptKind::ConcreteRequest, PromptSource::Requests(&spec)),
            "Create an AWS IAM policy that incorporates all of the following requests. Return only the JSON policy, nothing else:\n\
             Allowed requests:\n\
             {\"principal\": \"alice\", \"action\": \"s3:PutObjectAcl\", \"resource\": \"mybucket/backups/data/file8.txt\"}\n\
             Denied requests:\n\
             {\"principal\": \"bob\", \"action\": \"s3:DeleteObject\", \"resource\": \"mybucket/backups/data/file8.txt\"}\n",
        ),
        (
            build_prompt(PromptKind::CoarseGrained, PromptSource::Corpus(&entry)),
            "Create an AWS IAM policy based on this description. Return only the JSON policy, nothing else:\n\
             Requests by Alice to read objects in the public bucket should be allowed.\n",
        ),
        (
            build_prompt(PromptKind::FineGrainedSyntax, PromptSource::Corpus(&entry)),
            "Create an AWS IAM policy based on this description. Return only the JSON policy, nothing else:\n\
             ALLOW user:alice READ bucket:public-bucket/\n\
             *Note: Use ACCOUNT_ID as placeholder in ARNs\n",
        ),
    ];
    for (i, (built, expected)) in cases.into_iter().enumerate() {
        let built = built.map_err(|e| e.to_string())?;
        ensure(built.text == expected, || {
            format!("prompt {i}: {:?} != {expected:?}", built.text)
        })?;
    }
    Ok("3 prompts byte-identical".into())
}

// 8 ------------------------------------------------------------------------

fn performance_envelope() -> Outcome {
    let entries = corpus();
    let al = Arc::new(Alphabet::iam_default());
    let allow_all = {
        let raw = ConstantBackend::allow_all();
        let p = build_prompt(PromptKind::CoarseGrained, PromptSource::Corpus(&entries[0])).unwrap();
        policy_synth::synth::synthesize(&p, &raw)
            .unwrap()
            .extracted
            .unwrap()
    };
    let mut slowest = Duration::ZERO;
    let mut n = 0;
    for (i, e) in entries.iter().enumerate() {
        let next = &entries[(i + 1) % entries.len()].ground_truth;
        for other in [&compile_fgspec(&e.fg_spec), &allow_all, next] {
            let t = Instant::now();
            compare_default(other, &e.ground_truth, &al)
                .map_err(|err| format!("{}: {err}", e.id))?;
            slowest = slowest.max(t.elapsed());
            n += 1;
        }
    }
    ensure(slowest < Duration::from_secs(5), || {
        format!("slowest compare took {slowest:?}")
    })?;

    let t = Instant::now();
    let cfg = RunConfig::default();
    let seeds: Vec<u64> = (1..=100).collect();
    let r1 = run_rq1(&seeds, &GenParams::default(), &OracleBackend::new(), &cfg)
        .map_err(|e| e.to_string())?;
    let oracle = OracleBackend::new().with_corpus(&entries);
    let r2 = run_rq2(&entries, &oracle, &cfg);
    let r3 = run_rq3(&entries, &oracle, &cfg);
    let suite = t.elapsed();
    ensure(r1.mean_rate == 1.0, || {
        format!("oracle RQ1 mean {}", r1.mean_rate)
    })?;
    ensure(
        r2.count_of(Relation::Equivalent) == entries.len()
            && r3.count_of(Relation::Equivalent) == entries.len(),
        || "oracle RQ2/RQ3 not fully equivalent".into(),
    )?;
    ensure(suite < Duration::from_secs(300), || {
        format!("oracle suite took {suite:?}")
    })?;
    Ok(format!(
        "slowest of {n} corpus compares {slowest:.2?}; oracle RQ1(100)+RQ2+RQ3 in {suite:.2?}"
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "denotation agrees with evaluator",
            denotation_matches_evaluator,
            Some(60),
        ),
        (
            "compare agrees with brute force",
            compare_matches_brute_force,
            Some(120),
        ),
        ("model counting", counting_matches_enumeration, None),
        ("DSL oracle loop", dsl_oracle_loop, None),
        ("RQ1 controls and replay goldens", rq1_controls, None),
        ("spec generation bounds", spec_generation_bounds, None),
        ("prompt fidelity", prompt_fidelity, None),
        ("performance envelope", performance_envelope, None),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let mut outcome = run();
        let elapsed = t.elapsed();
        if let (Ok(_), Some(secs)) = (&outcome, limit) {
            if elapsed > Duration::from_secs(secs) {
                outcome = Err(format!("took {elapsed:.2?}, limit {secs} s"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail} [{elapsed:.2?}]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
