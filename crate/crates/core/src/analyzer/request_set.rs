use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::Zero;

use super::AnalyzerError;
use crate::pattern::{count_upto, Alphabet, CountResult, Dfa};
use crate::policy::{normalize_field, Field, Request};

/// Product of one language per field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cube {
    fields: [Dfa; 3],
}

impl Cube {
    pub fn new(principal: Dfa, action: Dfa, resource: Dfa) -> Self {
        Self {
            fields: [principal, action, resource],
        }
    }

    pub fn field(&self, field: Field) -> &Dfa {
        &self.fields[field as usize]
    }

    pub fn is_empty(&self) -> bool {
        self.fields.iter().any(Dfa::is_empty)
    }

    fn contains(&self, r: &Request) -> bool {
        Field::ALL
            .iter()
            .all(|&f| self.fields[f as usize].accepts(&normalize_field(f, r.field(f))))
    }

    fn intersect(&self, other: &Cube) -> Result<Option<Cube>, AnalyzerError> {
        let mut out = Vec::with_capacity(3);
        for (a, b) in self.fields.iter().zip(&other.fields) {
            let i = a.intersect(b)?;
            if i.is_empty() {
                return Ok(None);
            }
            out.push(i);
        }
        let [p, a, r]: [Dfa; 3] = out.try_into().expect("three fields");
        Ok(Some(Cube::new(p, a, r)))
    }

    /// `self ∖ other` as at most three pairwise-disjoint cubes:
    /// (P∖P')×A×R, (P∩P')×(A∖A')×R, (P∩P')×(A∩A')×(R∖R').
    fn minus(&self, other: &Cube) -> Result<Vec<Cube>, AnalyzerError> {
        let mut inter = Vec::with_capacity(3);
        for (a, b) in self.fields.iter().zip(&other.fields) {
            let i = a.intersect(b)?;
            if i.is_empty() {
                return Ok(vec![self.clone()]);
            }
            inter.push(i);
        }
        let mut pieces = Vec::new();
        for f in 0..3 {
            let rest = self.fields[f].difference(&other.fields[f])?;
            if rest.is_empty() {
                continue;
            }
            // earlier fields inside other, this one outside, later ones free
            let [p, a, r]: [Dfa; 3] = std::array::from_fn(|g| match g.cmp(&f) {
                std::cmp::Ordering::Less => inter[g].clone(),
                std::cmp::Ordering::Equal => rest.clone(),
                std::cmp::Ordering::Greater => self.fields[g].clone(),
            });
            pieces.push(Cube::new(p, a, r));
        }
        Ok(pieces)
    }

    fn count(&self, k: usize) -> BigUint {
        self.fields
            .iter()
            .map(|d| count_upto(d, k).count)
            .fold(BigUint::from(1u32), |acc, c| acc * c)
    }
}

/// Symbolic set of (principal, action, resource) triples: a finite union of
/// cubes. Action strings are kept in case-folded form, so the action
/// universe is the set of strings without ASCII uppercase letters.
#[derive(Clone, Debug)]
pub struct RequestSet {
    alphabet: Arc<Alphabet>,
    universe: Arc<[Dfa; 3]>,
    cubes: Vec<Cube>,
}

impl RequestSet {
    pub fn empty(alphabet: Arc<Alphabet>) -> Self {
        let universe = Arc::new(field_universes(&alphabet));
        Self {
            alphabet,
            universe,
            cubes: Vec::new(),
        }
    }

    pub fn universe(alphabet: Arc<Alphabet>) -> Self {
        let mut s = Self::empty(alphabet);
        let [p, a, r] = s.universe.as_ref().clone();
        s.cubes.push(Cube::new(p, a, r));
        s
    }

    pub(crate) fn with_universe_of(&self, cubes: Vec<Cube>) -> Self {
        Self {
            alphabet: Arc::clone(&self.alphabet),
            universe: Arc::clone(&self.universe),
            cubes: cubes.into_iter().filter(|c| !c.is_empty()).collect(),
        }
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// Full language of one field (all strings, or case-folded strings for actions).
    pub fn field_universe(&self, field: Field) -> &Dfa {
        &self.universe[field as usize]
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn push_cube(&mut self, cube: Cube) -> Result<(), AnalyzerError> {
        for (d, u) in cube.fields.iter().zip(self.universe.iter()) {
            if d.alphabet() != u.alphabet() {
                return Err(crate::pattern::PatternError::AlphabetMismatch.into());
            }
        }
        if !cube.is_empty() {
            self.cubes.push(cube);
        }
        Ok(())
    }

    pub fn contains(&self, r: &Request) -> bool {
        self.cubes.iter().any(|c| c.contains(r))
    }

    /// Cubes are never stored empty, so the set is empty iff it has none.
    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    fn check(&self, other: &Self) -> Result<(), AnalyzerError> {
        if self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(crate::pattern::PatternError::AlphabetMismatch.into())
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self, AnalyzerError> {
        self.check(other)?;
        let mut cubes = self.cubes.clone();
        cubes.extend(other.cubes.iter().cloned());
        Ok(self.with_universe_of(cubes))
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, AnalyzerError> {
        self.check(other)?;
        let mut cubes = Vec::new();
        for a in &self.cubes {
            for b in &other.cubes {
                if let Some(c) = a.intersect(b)? {
                    cubes.push(c);
                }
            }
        }
        Ok(self.with_universe_of(cubes))
    }

    /// Set difference, subtracting `other` one cube at a time.
    pub fn difference(&self, other: &Self) -> Result<Self, AnalyzerError> {
        self.check(other)?;
        let mut pieces = self.cubes.clone();
        for b in &other.cubes {
            let mut next = Vec::with_capacity(pieces.len());
            for c in &pieces {
                next.extend(c.minus(b)?);
            }
            pieces = next;
            if pieces.is_empty() {
                break;
            }
        }
        Ok(self.with_universe_of(pieces))
    }

    pub fn complement(&self) -> Result<Self, AnalyzerError> {
        Self::universe(Arc::clone(&self.alphabet)).difference(self)
    }

    /// Rewrites the union as pairwise-disjoint cubes with the same members.
    pub fn disjoint_cubes(&self) -> Result<Vec<Cube>, AnalyzerError> {
        let mut out: Vec<Cube> = Vec::new();
        for c in &self.cubes {
            let mut pieces = vec![c.clone()];
            for d in &out {
                let mut next = Vec::new();
                for p in &pieces {
                    next.extend(p.minus(d)?);
                }
                pieces = next;
                if pieces.is_empty() {
                    break;
                }
            }
            out.extend(pieces);
        }
        Ok(out)
    }

    /// Exact number of member triples whose three fields each have length ≤ `k`.
    pub fn count_upto(&self, k: usize) -> Result<CountResult, AnalyzerError> {
        let mut total = BigUint::zero();
        for c in self.disjoint_cubes()? {
            total += c.count(k);
        }
        Ok(CountResult {
            count: total,
            length_bound: k,
        })
    }
}

fn field_universes(alphabet: &Arc<Alphabet>) -> [Dfa; 3] {
    let all = Dfa::universal(Arc::clone(alphabet));
    let folded = folded_strings(alphabet);
    [all.clone(), folded, all]
}

/// Strings containing no ASCII uppercase letter.
fn folded_strings(alphabet: &Arc<Alphabet>) -> Dfa {
    let upper: Vec<char> = alphabet
        .symbols()
        .iter()
        .copied()
        .filter(char::is_ascii_uppercase)
        .collect();
    if upper.is_empty() {
        return Dfa::universal(Arc::clone(alphabet));
    }
    // complement of "*X*" for each uppercase X
    let mut any_upper = Dfa::empty(Arc::clone(alphabet));
    for c in upper {
        let d = Dfa::compile_glob(&format!("*{c}*"), Arc::clone(alphabet))
            .expect("symbol is in the alphabet");
        any_upper = any_upper.union(&d).expect("same alphabet");
    }
    any_upper.complement()
}
