use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{denote, AnalyzerError, RequestSet};
use crate::pattern::{decimal, Alphabet, CountResult};
use crate::policy::Policy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equivalent,
    FirstStrictlyMore,
    SecondStrictlyMore,
    Incomparable,
}

impl Relation {
    pub const ALL: [Relation; 4] = [
        Relation::Equivalent,
        Relation::FirstStrictlyMore,
        Relation::SecondStrictlyMore,
        Relation::Incomparable,
    ];

    pub fn from_differences(first_only_nonempty: bool, second_only_nonempty: bool) -> Self {
        match (first_only_nonempty, second_only_nonempty) {
            (false, false) => Relation::Equivalent,
            (true, false) => Relation::FirstStrictlyMore,
            (false, true) => Relation::SecondStrictlyMore,
            (true, true) => Relation::Incomparable,
        }
    }

    pub fn mirrored(self) -> Self {
        match self {
            Relation::FirstStrictlyMore => Relation::SecondStrictlyMore,
            Relation::SecondStrictlyMore => Relation::FirstStrictlyMore,
            other => other,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Relation::Equivalent => "equivalent",
            Relation::FirstStrictlyMore => "first_strictly_more",
            Relation::SecondStrictlyMore => "second_strictly_more",
            Relation::Incomparable => "incomparable",
        }
    }
}

/// Outcome of comparing two policies over one (alphabet, bound) universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComparisonVerdict {
    pub relation: Relation,
    /// Requests the first policy allows and the second does not.
    pub only_in_first: CountResult,
    /// Requests the second policy allows and the first does not.
    pub only_in_second: CountResult,
    pub bound: usize,
    pub alphabet_id: String,
}

#[derive(Serialize, Deserialize)]
struct VerdictJson {
    relation: Relation,
    #[serde(with = "decimal")]
    only_in_first: num_bigint::BigUint,
    #[serde(with = "decimal")]
    only_in_second: num_bigint::BigUint,
    bound: usize,
    alphabet: String,
}

impl Serialize for ComparisonVerdict {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        VerdictJson {
            relation: self.relation,
            only_in_first: self.only_in_first.count.clone(),
            only_in_second: self.only_in_second.count.clone(),
            bound: self.bound,
            alphabet: self.alphabet_id.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComparisonVerdict {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = VerdictJson::deserialize(d)?;
        Ok(Self {
            relation: v.relation,
            only_in_first: CountResult {
                count: v.only_in_first,
                length_bound: v.bound,
            },
            only_in_second: CountResult {
                count: v.only_in_second,
                length_bound: v.bound,
            },
            bound: v.bound,
            alphabet_id: v.alphabet,
        })
    }
}

/// Smallest bound that keeps every literal string of both policies inside
/// the counted universe: the longest pattern minus its `*` wildcards.
pub fn min_bound(p1: &Policy, p2: &Policy) -> usize {
    p1.patterns()
        .chain(p2.patterns())
        .map(|(_, pat)| pat.chars().filter(|&c| c != '*').count())
        .max()
        .unwrap_or(0)
}

pub fn default_bound(p1: &Policy, p2: &Policy) -> usize {
    min_bound(p1, p2) + 5
}

pub fn compare(
    p1: &Policy,
    p2: &Policy,
    alphabet: &Arc<Alphabet>,
    bound: usize,
) -> Result<ComparisonVerdict, AnalyzerError> {
    let required = min_bound(p1, p2);
    if bound < required {
        return Err(AnalyzerError::BoundTooSmall { bound, required });
    }
    let d1 = denote(p1, alphabet)?;
    let d2 = denote(p2, alphabet)?;
    let only_first = d1.difference(&d2)?;
    let only_second = d2.difference(&d1)?;
    let relation = Relation::from_differences(!only_first.is_empty(), !only_second.is_empty());
    let only_in_first = counted(&only_first, bound)?;
    let only_in_second = counted(&only_second, bound)?;
    Ok(ComparisonVerdict {
        relation,
        only_in_first,
        only_in_second,
        bound,
        alphabet_id: alphabet.id(),
    })
}

/// [`compare`] at [`default_bound`].
pub fn compare_default(
    p1: &Policy,
    p2: &Policy,
    alphabet: &Arc<Alphabet>,
) -> Result<ComparisonVerdict, AnalyzerError> {
    compare(p1, p2, alphabet, default_bound(p1, p2))
}

/// Counts a difference set, refusing bounds under which a non-empty set
/// would count as zero.
fn counted(set: &RequestSet, bound: usize) -> Result<CountResult, AnalyzerError> {
    let c = set.count_upto(bound)?;
    if c.is_zero() && !set.is_empty() {
        let required = set
            .disjoint_cubes()?
            .iter()
            .filter_map(|cube| {
                crate::policy::Field::ALL
                    .iter()
                    .map(|&f| cube.field(f).shortest_accepted_len())
                    .try_fold(0usize, |acc, l| l.map(|l| acc.max(l)))
            })
            .min()
            .unwrap_or(bound);
        return Err(AnalyzerError::BoundTooSmall { bound, required });
    }
    Ok(c)
}
