#![allow(dead_code)]

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use policy_synth::pattern::Alphabet;
use policy_synth::policy::{Effect, Matcher, Polarity, Policy, Statement};
use rand::Rng;

pub const SMALL: [char; 3] = ['a', 'b', 'A'];

pub fn small_alphabet() -> Arc<Alphabet> {
    Arc::new(Alphabet::new(SMALL).unwrap())
}

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Every string over `symbols` of length `0..=n`, shortest first.
pub fn strings_upto(symbols: &[char], n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..n {
        layer = layer
            .iter()
            .flat_map(|s| symbols.iter().map(move |c| format!("{s}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

pub fn random_pattern(rng: &mut impl Rng, symbols: &[char], max_len: usize) -> String {
    let len = rng.gen_range(1..=max_len);
    (0..len)
        .map(|_| match rng.gen_range(0..10) {
            0 | 1 => '*',
            2 => '?',
            _ => symbols[rng.gen_range(0..symbols.len())],
        })
        .collect()
}

fn random_matcher(rng: &mut impl Rng, symbols: &[char], max_len: usize) -> Matcher {
    let n = rng.gen_range(1..=2);
    let patterns = (0..n)
        .map(|_| random_pattern(rng, symbols, max_len))
        .collect();
    let polarity = if rng.gen_bool(0.25) {
        Polarity::Negated
    } else {
        Polarity::Positive
    };
    Matcher::new(polarity, patterns).expect("non-empty")
}

/// Up to `max_statements` statements with random effects, polarities and
/// glob patterns of length `1..=max_len`.
pub fn random_policy(
    rng: &mut impl Rng,
    symbols: &[char],
    max_statements: usize,
    max_len: usize,
) -> Policy {
    let n = rng.gen_range(1..=max_statements);
    Policy::new(
        (0..n)
            .map(|_| Statement {
                sid: None,
                effect: if rng.gen_bool(0.35) {
                    Effect::Deny
                } else {
                    Effect::Allow
                },
                principal: random_matcher(rng, symbols, max_len),
                action: random_matcher(rng, symbols, max_len),
                resource: random_matcher(rng, symbols, max_len),
            })
            .collect(),
    )
}

/// Groups `strings` by the values of `probes`, returning one representative
/// per class with the class size. Any function of the probes is constant
/// on a class, so checking representatives with weights is exhaustive.
pub fn classes<'a>(strings: &'a [String], probes: &[&dyn Fn(&str) -> bool]) -> Vec<(&'a str, u64)> {
    let mut index: HashMap<Vec<bool>, usize> = HashMap::new();
    let mut out: Vec<(&str, u64)> = Vec::new();
    for s in strings {
        let sig: Vec<bool> = probes.iter().map(|p| p(s)).collect();
        match index.get(&sig) {
            Some(&i) => out[i].1 += 1,
            None => {
                index.insert(sig, out.len());
                out.push((s, 1));
            }
        }
    }
    out
}
