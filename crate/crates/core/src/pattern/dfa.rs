use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::Arc;

use super::{Alphabet, PatternError};

/// Complete deterministic automaton over an [`Alphabet`].
///
/// Every value is kept minimal with states numbered in breadth-first order
/// from the start state (symbols visited in alphabet order). Two automata
/// over the same alphabet therefore recognize the same language exactly
/// when they compare equal.
#[derive(Clone, Debug)]
pub struct Dfa {
    alphabet: Arc<Alphabet>,
    start: u32,
    accepting: Vec<bool>,
    // row-major: trans[state * |alphabet| + symbol]
    trans: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GlobToken {
    Literal(usize),
    AnyOne,
    AnyRun,
}

impl Dfa {
    /// Automaton accepting every string over `alphabet`.
    pub fn universal(alphabet: Arc<Alphabet>) -> Self {
        let k = alphabet.len();
        Self {
            alphabet,
            start: 0,
            accepting: vec![true],
            trans: vec![0; k],
        }
    }

    /// Automaton accepting nothing.
    pub fn empty(alphabet: Arc<Alphabet>) -> Self {
        let k = alphabet.len();
        Self {
            alphabet,
            start: 0,
            accepting: vec![false],
            trans: vec![0; k],
        }
    }

    /// Automaton accepting exactly the strings `glob_match(pattern, _)` accepts.
    pub fn compile_glob(pattern: &str, alphabet: Arc<Alphabet>) -> Result<Self, PatternError> {
        let mut tokens = Vec::with_capacity(pattern.len());
        for c in pattern.chars() {
            let tok = match c {
                '*' => GlobToken::AnyRun,
                '?' => GlobToken::AnyOne,
                _ => match alphabet.index_of(c) {
                    Some(i) => GlobToken::Literal(i),
                    None => {
                        return Err(PatternError::CharOutsideAlphabet {
                            ch: c,
                            text: pattern.to_string(),
                        })
                    }
                },
            };
            // consecutive stars are one star
            if tok == GlobToken::AnyRun && tokens.last() == Some(&GlobToken::AnyRun) {
                continue;
            }
            tokens.push(tok);
        }
        Ok(subset_construction(&tokens, alphabet))
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.accepting.len()
    }

    pub fn start(&self) -> usize {
        self.start as usize
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn next(&self, state: usize, symbol: usize) -> usize {
        self.trans[state * self.alphabet.len() + symbol] as usize
    }

    /// Runs the automaton; strings containing a non-symbol are rejected.
    pub fn accepts(&self, input: &str) -> bool {
        let mut state = self.start();
        for c in input.chars() {
            match self.alphabet.index_of(c) {
                Some(i) => state = self.next(state, i),
                None => return false,
            }
        }
        self.accepting[state]
    }

    /// True iff no accepting state is reachable. Minimal automata have no
    /// unreachable states, so this is a scan of the acceptance flags.
    pub fn is_empty(&self) -> bool {
        !self.accepting.iter().any(|&a| a)
    }

    /// Length of the shortest accepted string, if any.
    pub fn shortest_accepted_len(&self) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.state_count()];
        let mut queue = VecDeque::from([self.start()]);
        dist[self.start()] = 0;
        while let Some(s) = queue.pop_front() {
            if self.accepting[s] {
                return Some(dist[s]);
            }
            for sym in 0..self.alphabet.len() {
                let t = self.next(s, sym);
                if dist[t] == usize::MAX {
                    dist[t] = dist[s] + 1;
                    queue.push_back(t);
                }
            }
        }
        None
    }

    /// True iff every string is accepted.
    pub fn is_universal(&self) -> bool {
        self.accepting.iter().all(|&a| a)
    }

    pub fn complement(&self) -> Self {
        // flipping acceptance keeps a minimal automaton minimal and keeps the
        // breadth-first numbering intact
        Self {
            alphabet: Arc::clone(&self.alphabet),
            start: self.start,
            accepting: self.accepting.iter().map(|a| !a).collect(),
            trans: self.trans.clone(),
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self, PatternError> {
        self.product(other, |a, b| a || b)
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, PatternError> {
        self.product(other, |a, b| a && b)
    }

    /// Strings accepted by `self` and rejected by `other`.
    pub fn difference(&self, other: &Self) -> Result<Self, PatternError> {
        self.product(other, |a, b| a && !b)
    }

    /// Language equality (structural equality of canonical forms).
    pub fn equivalent(&self, other: &Self) -> Result<bool, PatternError> {
        self.check_alphabet(other)?;
        Ok(self == other)
    }

    /// Language inclusion.
    pub fn is_subset_of(&self, other: &Self) -> Result<bool, PatternError> {
        Ok(self.difference(other)?.is_empty())
    }

    fn check_alphabet(&self, other: &Self) -> Result<(), PatternError> {
        if Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet {
            Ok(())
        } else {
            Err(PatternError::AlphabetMismatch)
        }
    }

    fn product(
        &self,
        other: &Self,
        accept: impl Fn(bool, bool) -> bool,
    ) -> Result<Self, PatternError> {
        self.check_alphabet(other)?;
        let k = self.alphabet.len();
        let width = other.state_count();
        let mut index: Vec<u32> = vec![u32::MAX; self.state_count() * width];
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        let mut queue = VecDeque::new();

        let start = (self.start(), other.start());
        index[start.0 * width + start.1] = 0;
        pairs.push(start);
        queue.push_back(0usize);

        let mut trans = Vec::new();
        while let Some(id) = queue.pop_front() {
            let (p, q) = pairs[id];
            debug_assert_eq!(trans.len(), id * k);
            for sym in 0..k {
                let np = self.next(p, sym);
                let nq = other.next(q, sym);
                let slot = &mut index[np * width + nq];
                if *slot == u32::MAX {
                    *slot = pairs.len() as u32;
                    pairs.push((np, nq));
                    queue.push_back(pairs.len() - 1);
                }
                trans.push(*slot);
            }
        }
        let accepting = pairs
            .iter()
            .map(|&(p, q)| accept(self.accepting[p], other.accepting[q]))
            .collect();
        Ok(minimize(Arc::clone(&self.alphabet), 0, accepting, trans))
    }

    /// Graphviz rendering for inspection.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n");
        for s in 0..self.state_count() {
            let shape = if self.accepting[s] {
                "doublecircle"
            } else {
                "circle"
            };
            let _ = writeln!(out, "  s{s} [shape={shape}];");
        }
        let _ = writeln!(out, "  __start -> s{};", self.start);
        for s in 0..self.state_count() {
            // group symbols sharing a target onto one edge
            let mut by_target: Vec<(usize, String)> = Vec::new();
            for (sym, &c) in self.alphabet.symbols().iter().enumerate() {
                let t = self.next(s, sym);
                match by_target.iter_mut().find(|(tt, _)| *tt == t) {
                    Some((_, label)) => label.push(c),
                    None => by_target.push((t, c.to_string())),
                }
            }
            for (t, label) in by_target {
                let label = label.replace('\\', "\\\\").replace('"', "\\\"");
                let _ = writeln!(out, "  s{s} -> s{t} [label=\"{label}\"];");
            }
        }
        out.push_str("}\n");
        out
    }
}

impl PartialEq for Dfa {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet)
            && self.start == other.start
            && self.accepting == other.accepting
            && self.trans == other.trans
    }
}

impl Eq for Dfa {}

fn subset_construction(tokens: &[GlobToken], alphabet: Arc<Alphabet>) -> Dfa {
    let k = alphabet.len();
    let positions = tokens.len() + 1;
    let words = positions.div_ceil(64);

    // a star may match the empty string, so a position in front of a star
    // also stands at the position after it
    let close = |set: &mut Vec<u64>| {
        for i in 0..tokens.len() {
            if set[i / 64] >> (i % 64) & 1 == 1 && tokens[i] == GlobToken::AnyRun {
                set[(i + 1) / 64] |= 1 << ((i + 1) % 64);
            }
        }
    };

    let mut init = vec![0u64; words];
    init[0] = 1;
    close(&mut init);

    let mut ids: HashMap<Vec<u64>, u32> = HashMap::new();
    let mut sets: Vec<Vec<u64>> = Vec::new();
    ids.insert(init.clone(), 0);
    sets.push(init);

    let mut trans = Vec::new();
    let mut cur = 0;
    while cur < sets.len() {
        for sym in 0..k {
            let mut next = vec![0u64; words];
            for (i, tok) in tokens.iter().enumerate() {
                if sets[cur][i / 64] >> (i % 64) & 1 == 0 {
                    continue;
                }
                let target = match *tok {
                    GlobToken::Literal(l) if l == sym => i + 1,
                    GlobToken::Literal(_) => continue,
                    GlobToken::AnyOne => i + 1,
                    GlobToken::AnyRun => i,
                };
                next[target / 64] |= 1 << (target % 64);
            }
            close(&mut next);
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = sets.len() as u32;
                    ids.insert(next.clone(), id);
                    sets.push(next);
                    id
                }
            };
            trans.push(id);
        }
        cur += 1;
    }
    let last = tokens.len();
    let accepting = sets
        .iter()
        .map(|s| s[last / 64] >> (last % 64) & 1 == 1)
        .collect();
    minimize(alphabet, 0, accepting, trans)
}

/// Moore partition refinement followed by breadth-first renumbering.
pub(crate) fn minimize(
    alphabet: Arc<Alphabet>,
    start: usize,
    accepting: Vec<bool>,
    trans: Vec<u32>,
) -> Dfa {
    let k = alphabet.len();
    let n = accepting.len();

    // restrict to reachable states
    let mut reach = vec![false; n];
    let mut order = vec![start];
    reach[start] = true;
    let mut i = 0;
    while i < order.len() {
        let s = order[i];
        for sym in 0..k {
            let t = trans[s * k + sym] as usize;
            if !reach[t] {
                reach[t] = true;
                order.push(t);
            }
        }
        i += 1;
    }

    let mut class: Vec<u32> = accepting.iter().map(|&a| a as u32).collect();
    let mut class_count = {
        let mut seen = [false; 2];
        for &s in &order {
            seen[class[s] as usize] = true;
        }
        seen.iter().filter(|&&b| b).count()
    };
    loop {
        let mut sig_ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut next_class = vec![0u32; n];
        for &s in &order {
            let mut sig = Vec::with_capacity(k + 1);
            sig.push(class[s]);
            sig.extend((0..k).map(|sym| class[trans[s * k + sym] as usize]));
            let fresh = sig_ids.len() as u32;
            next_class[s] = *sig_ids.entry(sig).or_insert(fresh);
        }
        let count = sig_ids.len();
        class = next_class;
        if count == class_count {
            break;
        }
        class_count = count;
    }

    // breadth-first renumbering of the quotient from the start class
    let mut rep: Vec<Option<usize>> = vec![None; class_count];
    for &s in &order {
        let c = class[s] as usize;
        if rep[c].is_none() {
            rep[c] = Some(s);
        }
    }
    let mut canon: Vec<u32> = vec![u32::MAX; class_count];
    let mut queue: Vec<usize> = vec![class[start] as usize];
    canon[class[start] as usize] = 0;
    let mut new_trans = Vec::with_capacity(class_count * k);
    let mut new_accepting = Vec::with_capacity(class_count);
    let mut head = 0;
    while head < queue.len() {
        let c = queue[head];
        let s = rep[c].expect("every class has a representative");
        new_accepting.push(accepting[s]);
        for sym in 0..k {
            let tc = class[trans[s * k + sym] as usize] as usize;
            if canon[tc] == u32::MAX {
                canon[tc] = queue.len() as u32;
                queue.push(tc);
            }
            new_trans.push(canon[tc]);
        }
        head += 1;
    }
    Dfa {
        alphabet,
        start: 0,
        accepting: new_accepting,
        trans: new_trans,
    }
}
