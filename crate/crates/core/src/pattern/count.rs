use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::Dfa;

/// Exact number of accepted strings whose length is at most `length_bound`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountResult {
    #[serde(with = "decimal")]
    pub count: BigUint,
    pub length_bound: usize,
}

impl CountResult {
    pub fn is_zero(&self) -> bool {
        self.count.is_zero()
    }
}

/// Path counting by length. `paths[s]` holds the number of strings of the
/// current length that lead from the start state to `s`.
pub fn count_upto(dfa: &Dfa, k: usize) -> CountResult {
    let n = dfa.state_count();
    let sigma = dfa.alphabet().len();

    // collapse parallel edges into (target, multiplicity)
    let edges: Vec<Vec<(usize, u32)>> = (0..n)
        .map(|s| {
            let mut out: Vec<(usize, u32)> = Vec::new();
            for sym in 0..sigma {
                let t = dfa.next(s, sym);
                match out.iter_mut().find(|(tt, _)| *tt == t) {
                    Some((_, m)) => *m += 1,
                    None => out.push((t, 1)),
                }
            }
            out
        })
        .collect();

    let mut paths = vec![BigUint::zero(); n];
    paths[dfa.start()] = BigUint::from(1u32);
    let mut total = BigUint::zero();
    for len in 0..=k {
        for (s, p) in paths.iter().enumerate() {
            if dfa.is_accepting(s) {
                total += p;
            }
        }
        if len == k {
            break;
        }
        let mut next = vec![BigUint::zero(); n];
        for (s, p) in paths.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for &(t, m) in &edges[s] {
                next[t] += p * m;
            }
        }
        paths = next;
    }
    CountResult {
        count: total,
        length_bound: k,
    }
}

pub(crate) mod decimal {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_str_radix(10))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(d)?;
        BigUint::parse_bytes(text.as_bytes(), 10)
            .ok_or_else(|| serde::de::Error::custom(format!("not a decimal integer: {text:?}")))
    }
}
