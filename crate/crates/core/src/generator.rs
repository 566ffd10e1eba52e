//! Edge-emitting hidden Markov generators: parsing, validation,
//! classification, exact word probabilities, and state minimization.
//!
//! A generator is a triple (states, alphabet, transition tensor) where the
//! tensor entry for (from, to, symbol) is the probability of moving
//! `from -> to` while emitting `symbol`. Every accepted generator is
//! row-stochastic and irreducible and carries its stationary distribution.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

use crate::error::{Error, Result};
use crate::numeric::shannon_entropy_bits;

/// Tolerance on per-state outgoing probability sums.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Tolerance on the stationarity residual `max |T pi - pi|`.
pub const STATIONARY_TOL: f64 = 1e-10;
/// Per-word tolerance when comparing conditional future distributions.
pub const MORPH_TOL: f64 = 1e-9;
/// Default cap on the number of word-tree nodes visited by exact
/// enumeration routines (block entropies, morph comparison).
pub const DEFAULT_WORD_BUDGET: usize = 1 << 20;

/// One transition of a generator spec file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TransitionSpec {
    pub from: String,
    pub to: String,
    pub symbol: String,
    pub p: f64,
}

/// On-disk generator description.
///
/// JSON layout: `{"states": [...], "alphabet": [...], "transitions":
/// [{"from": ..., "to": ..., "symbol": ..., "p": ...}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeneratorSpec {
    pub states: Vec<String>,
    pub alphabet: Vec<String>,
    pub transitions: Vec<TransitionSpec>,
}

impl GeneratorSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Spec(format!("invalid JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization cannot fail")
    }

    /// Validates the spec and returns the executable generator.
    pub fn validate(self) -> Result<Generator> {
        Generator::from_spec(self)
    }
}

/// A finite word over a generator's alphabet, stored as symbol indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A validated, irreducible, row-stochastic generator.
#[derive(Debug, Clone)]
pub struct Generator {
    spec: GeneratorSpec,
    n_states: usize,
    n_symbols: usize,
    /// Per symbol x: list of (to, from, p) with p = T^x_{to,from}.
    per_symbol: Vec<Vec<(usize, usize, f64)>>,
    /// Per state s: list of (to, symbol, p).
    outgoing: Vec<Vec<(usize, usize, f64)>>,
    stationary: DVector<f64>,
    unifilar: bool,
    retrodictive: bool,
}

impl Generator {
    /// Validates `spec`: structural checks, row sums, irreducibility, then
    /// solves for the stationary distribution and classifies the generator.
    pub fn from_spec(spec: GeneratorSpec) -> Result<Self> {
        if spec.states.is_empty() {
            return Err(Error::Spec("empty state set".into()));
        }
        if spec.alphabet.is_empty() {
            return Err(Error::Spec("empty alphabet".into()));
        }
        let state_idx: HashMap<&str, usize> = spec
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if state_idx.len() != spec.states.len() {
            return Err(Error::Spec("duplicate state labels".into()));
        }
        let symbol_idx: HashMap<&str, usize> = spec
            .alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if symbol_idx.len() != spec.alphabet.len() {
            return Err(Error::Spec("duplicate alphabet symbols".into()));
        }

        let n = spec.states.len();
        let m = spec.alphabet.len();
        let mut per_symbol = vec![Vec::new(); m];
        let mut outgoing = vec![Vec::new(); n];
        let mut seen = HashSet::new();
        for t in &spec.transitions {
            let from = *state_idx
                .get(t.from.as_str())
                .ok_or_else(|| Error::Alphabet { kind: "state", name: t.from.clone() })?;
            let to = *state_idx
                .get(t.to.as_str())
                .ok_or_else(|| Error::Alphabet { kind: "state", name: t.to.clone() })?;
            let sym = *symbol_idx
                .get(t.symbol.as_str())
                .ok_or_else(|| Error::Alphabet { kind: "symbol", name: t.symbol.clone() })?;
            if !(t.p > 0.0 && t.p <= 1.0) {
                return Err(Error::Spec(format!(
                    "transition {} -> {} on '{}' has probability {} outside (0, 1]",
                    t.from, t.to, t.symbol, t.p
                )));
            }
            if !seen.insert((from, to, sym)) {
                return Err(Error::Spec(format!(
                    "duplicate transition {} -> {} on '{}'",
                    t.from, t.to, t.symbol
                )));
            }
            per_symbol[sym].push((to, from, t.p));
            outgoing[from].push((to, sym, t.p));
        }

        for (s, out) in outgoing.iter().enumerate() {
            let sum: f64 = out.iter().map(|&(_, _, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::RowSum { state: spec.states[s].clone(), sum });
            }
        }

        check_strong_connectivity(&spec, &outgoing, n)?;

        let stationary = solve_stationary(&per_symbol, n)?;

        let unifilar = compute_unifilar(&outgoing);
        let retrodictive = compute_retrodictive(&per_symbol, n);

        Ok(Generator {
            spec,
            n_states: n,
            n_symbols: m,
            per_symbol,
            outgoing,
            stationary,
            unifilar,
            retrodictive,
        })
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn state_label(&self, s: usize) -> &str {
        &self.spec.states[s]
    }

    pub fn symbol_label(&self, x: usize) -> &str {
        &self.spec.alphabet[x]
    }

    /// Stationary distribution pi with `T pi = pi`.
    pub fn stationary(&self) -> &DVector<f64> {
        &self.stationary
    }

    /// Transitions (to, from, p) that emit symbol `x`.
    pub fn symbol_transitions(&self, x: usize) -> &[(usize, usize, f64)] {
        &self.per_symbol[x]
    }

    /// Outgoing transitions (to, symbol, p) of state `s`.
    pub fn outgoing(&self, s: usize) -> &[(usize, usize, f64)] {
        &self.outgoing[s]
    }

    /// Dense symbol matrix M with `M[(to, from)] = T^x_{to,from}`.
    pub fn symbol_matrix(&self, x: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_states, self.n_states);
        for &(to, from, p) in &self.per_symbol[x] {
            m[(to, from)] += p;
        }
        m
    }

    /// True iff for every (state, symbol) at most one end state is possible.
    pub fn is_unifilar(&self) -> bool {
        self.unifilar
    }

    /// True iff for every (end state, symbol) at most one start state is
    /// possible.
    pub fn is_retrodictive(&self) -> bool {
        self.retrodictive
    }

    /// Detects the structural family whose classical and quantum work
    /// costs coincide exactly despite a strict memory compression
    /// advantage.
    ///
    /// States sharing an outgoing (symbol, end state) pair have
    /// non-orthogonal quantum memory states; when every connected cluster
    /// of such states is entered exclusively through one common symbol,
    /// the cluster appears inside a single symbol block of the joint
    /// end-state/symbol state with exactly its stationary weights, so the
    /// entropy reductions of the memory state and of the joint state
    /// cancel and no work advantage remains. Returns true only when at
    /// least one non-trivial cluster exists and all of them are
    /// symbol-uniform in this sense.
    pub fn has_symbol_uniform_overlap_clusters(&self) -> bool {
        let n = self.n_states;
        let mut parent: Vec<usize> = (0..n).collect();
        // union states sharing an outgoing (end state, symbol) pair
        for edges in &self.per_symbol {
            let mut by_end: HashMap<usize, usize> = HashMap::new();
            for &(to, from, _) in edges {
                if let Some(&other) = by_end.get(&to) {
                    let (a, b) = (resolve(&mut parent, other), resolve(&mut parent, from));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                } else {
                    by_end.insert(to, from);
                }
            }
        }
        let mut entry_symbols: Vec<HashSet<usize>> = vec![HashSet::new(); n];
        for (x, edges) in self.per_symbol.iter().enumerate() {
            for &(to, _, _) in edges {
                entry_symbols[to].insert(x);
            }
        }
        let mut clusters: HashMap<usize, Vec<usize>> = HashMap::new();
        for s in 0..n {
            let root = resolve(&mut parent, s);
            clusters.entry(root).or_default().push(s);
        }
        let mut found_nontrivial = false;
        for members in clusters.values() {
            if members.len() < 2 {
                continue;
            }
            found_nontrivial = true;
            let mut symbols: HashSet<usize> = HashSet::new();
            for &s in members {
                symbols.extend(entry_symbols[s].iter().copied());
            }
            if symbols.len() != 1 || members.iter().any(|&s| entry_symbols[s].len() != 1) {
                return false;
            }
        }
        found_nontrivial
    }

    /// How much the emitted symbol reveals about the end state: the
    /// largest deviation `|P(s'|x) - pi(s')|` over symbols and end states.
    /// Zero means the end-state distribution is independent of the symbol,
    /// in which case the classical and quantum work costs coincide (the
    /// per-symbol blocks of the joint state are copies of the stationary
    /// memory state).
    pub fn symbol_end_state_dependence(&self) -> f64 {
        let pi = &self.stationary;
        let mut dependence = 0.0f64;
        for edges in &self.per_symbol {
            let mut q = vec![0.0; self.n_states];
            for &(to, from, p) in edges {
                q[to] += p * pi[from];
            }
            let total: f64 = q.iter().sum();
            if total <= 1e-15 {
                continue;
            }
            for s in 0..self.n_states {
                dependence = dependence.max((q[s] / total - pi[s]).abs());
            }
        }
        dependence
    }

    /// Strength of the strongest shared transition: the largest `min(p, q)`
    /// over pairs of distinct states entering a common (end state, symbol)
    /// slot. Zero iff the generator is retrodictive; it lower-bounds the
    /// largest quantum memory-state overlap.
    pub fn strongest_shared_transition(&self) -> f64 {
        let mut best = 0.0f64;
        for edges in &self.per_symbol {
            let mut top_two: HashMap<usize, (f64, f64)> = HashMap::new();
            for &(to, _, p) in edges {
                let entry = top_two.entry(to).or_insert((0.0, 0.0));
                if p > entry.0 {
                    *entry = (p, entry.0);
                } else if p > entry.1 {
                    entry.1 = p;
                }
            }
            for &(first, second) in top_two.values() {
                best = best.max(first.min(second));
            }
        }
        best
    }

    /// Applies the symbol-x transition matrix to a state-distribution
    /// vector: `out[to] += p * v[from]`.
    pub fn propagate(&self, x: usize, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n_states);
        for &(to, from, p) in &self.per_symbol[x] {
            out[to] += p * v[from];
        }
        out
    }

    /// Builds a word from symbol labels, rejecting foreign symbols.
    pub fn word_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Word> {
        labels
            .iter()
            .map(|l| {
                self.spec
                    .alphabet
                    .iter()
                    .position(|a| a == l.as_ref())
                    .ok_or_else(|| Error::Alphabet { kind: "symbol", name: l.as_ref().to_string() })
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// Exact word probability: pi left-multiplied by the symbol matrices in
    /// emission order, summed over the final state.
    pub fn word_probability(&self, word: &Word) -> Result<f64> {
        let mut v = self.stationary.clone();
        for &x in &word.0 {
            if x >= self.n_symbols {
                return Err(Error::Alphabet { kind: "symbol", name: format!("#{x}") });
            }
            v = self.propagate(x, &v);
        }
        Ok(v.sum().clamp(0.0, 1.0))
    }

    /// Block entropies H(X_{0:L}) in bits for L = 0..=l_max, by exact
    /// enumeration of all words with non-zero probability.
    pub fn block_entropies(&self, l_max: usize, budget: usize) -> Result<Vec<f64>> {
        let mut nodes = 1usize;
        let mut level = 1usize;
        for _ in 0..l_max {
            level = level.saturating_mul(self.n_symbols);
            nodes = nodes.saturating_add(level);
            if nodes > budget {
                return Err(Error::Resource(format!(
                    "word tree up to length {l_max} exceeds budget {budget}"
                )));
            }
        }
        let mut acc = vec![0.0; l_max + 1];
        self.entropy_walk(&self.stationary.clone(), 0, l_max, &mut acc);
        // acc[l] holds -sum p log2 p over words of length l
        Ok(acc)
    }

    fn entropy_walk(&self, v: &DVector<f64>, depth: usize, l_max: usize, acc: &mut Vec<f64>) {
        acc[depth] += shannon_entropy_bits(std::iter::once(v.sum()));
        if depth == l_max {
            return;
        }
        for x in 0..self.n_symbols {
            let w = self.propagate(x, v);
            if w.sum() > 1e-300 {
                self.entropy_walk(&w, depth + 1, l_max, acc);
            }
        }
    }

    /// All length-`l` words with non-zero probability, in lexicographic
    /// order of symbol indices, with their exact probabilities.
    pub fn word_distribution(&self, l: usize, budget: usize) -> Result<Vec<(Vec<usize>, f64)>> {
        if self.n_symbols.checked_pow(l as u32).is_none_or(|n| n > budget) {
            return Err(Error::Resource(format!(
                "enumerating |X|^{l} words exceeds budget {budget}"
            )));
        }
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.dist_walk(&self.stationary.clone(), l, &mut prefix, &mut out);
        Ok(out)
    }

    fn dist_walk(
        &self,
        v: &DVector<f64>,
        remaining: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if remaining == 0 {
            out.push((prefix.clone(), v.sum()));
            return;
        }
        for x in 0..self.n_symbols {
            let w = self.propagate(x, v);
            if w.sum() > 0.0 {
                prefix.push(x);
                self.dist_walk(&w, remaining - 1, prefix, out);
                prefix.pop();
            }
        }
    }

    /// Entropy rate of a unifilar generator:
    /// `h = sum_s pi(s) H(outgoing distribution of s)` in bits/step.
    pub fn entropy_rate_unifilar(&self) -> Result<f64> {
        if !self.unifilar {
            return Err(Error::NotUnifilar);
        }
        Ok((0..self.n_states)
            .map(|s| {
                self.stationary[s]
                    * shannon_entropy_bits(self.outgoing[s].iter().map(|&(_, _, p)| p))
            })
            .sum())
    }

    /// Block-entropy estimate `H(X_{0:L}) - H(X_{0:L-1})` of the entropy
    /// rate. Converges to h from above as L grows (an upper bound for every
    /// L), and is non-increasing in L.
    pub fn entropy_rate_estimate(&self, l_max: usize, budget: usize) -> Result<f64> {
        if l_max == 0 || l_max > 16 {
            return Err(Error::Domain(format!("l_max {l_max} outside 1..=16")));
        }
        let h = self.block_entropies(l_max, budget)?;
        Ok(h[l_max] - h[l_max - 1])
    }

    /// Merges states with identical conditional future word distributions.
    ///
    /// For up to [`MERGE_EXACT_MAX`] states, equivalence is decided by
    /// comparing P(w | S_0 = s) for every word w up to length |S| with
    /// per-word tolerance [`MORPH_TOL`], pruning state pairs as soon as a
    /// separating word is found. Larger generators fall back to
    /// probabilistic-bisimulation refinement, which merges only provably
    /// equivalent states (it may keep apart states that a deeper word
    /// comparison would merge, which is harmless).
    ///
    /// Incoming transitions of merged states are redirected onto the class
    /// representative with probabilities summed; the stationary distribution
    /// is recomputed. Idempotent.
    pub fn merge_equivalent_states(&self) -> Generator {
        let classes = if self.n_states <= MERGE_EXACT_MAX {
            self.morph_classes_exact()
        } else {
            self.morph_classes_refinement()
        };
        if classes.iter().enumerate().all(|(s, &c)| s == c) {
            return self.clone();
        }

        let kept: Vec<usize> = (0..self.n_states).filter(|&s| classes[s] == s).collect();
        let states: Vec<String> = kept.iter().map(|&s| self.spec.states[s].clone()).collect();
        let mut merged: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
        for &s in &kept {
            for &(to, x, p) in &self.outgoing[s] {
                *merged.entry((s, classes[to], x)).or_insert(0.0) += p;
            }
        }
        let transitions = merged
            .into_iter()
            .map(|((from, to, x), p)| TransitionSpec {
                from: self.spec.states[from].clone(),
                to: self.spec.states[to].clone(),
                symbol: self.spec.alphabet[x].clone(),
                p,
            })
            .collect();
        let spec = GeneratorSpec { states, alphabet: self.spec.alphabet.clone(), transitions };
        Generator::from_spec(spec).expect("quotient of a valid generator stays valid")
    }

    /// Exact pairwise morph comparison by suffix-first word enumeration.
    /// Returns, per state, the representative (smallest index) of its class.
    fn morph_classes_exact(&self) -> Vec<usize> {
        let n = self.n_states;
        let mut alive: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let ones = DVector::from_element(n, 1.0);
        let mut nodes = 0usize;
        self.morph_walk(&ones, 0, &mut alive, &mut nodes);
        let mut classes: Vec<usize> = (0..n).collect();
        // union toward the smallest representative
        for &(i, j) in &alive {
            let ri = resolve(&mut classes, i);
            let rj = resolve(&mut classes, j);
            if ri != rj {
                classes[ri.max(rj)] = ri.min(rj);
            }
        }
        (0..n).map(|s| resolve(&mut classes, s)).collect()
    }

    fn morph_walk(
        &self,
        u: &DVector<f64>,
        depth: usize,
        alive: &mut Vec<(usize, usize)>,
        nodes: &mut usize,
    ) {
        alive.retain(|&(i, j)| (u[i] - u[j]).abs() <= MORPH_TOL);
        *nodes += 1;
        if alive.is_empty() || depth >= self.n_states || *nodes > DEFAULT_WORD_BUDGET {
            return;
        }
        for x in 0..self.n_symbols {
            // row-vector step: u'[s] = sum_{s'} u[s'] T^x_{s',s}
            let mut next = DVector::zeros(self.n_states);
            for &(to, from, p) in &self.per_symbol[x] {
                next[from] += u[to] * p;
            }
            if next.amax() > 1e-300 {
                self.morph_walk(&next, depth + 1, alive, nodes);
            }
        }
    }

    /// Probabilistic-bisimulation partition refinement. Sound for merging
    /// (bisimilar states have equal morphs) but may under-merge.
    fn morph_classes_refinement(&self) -> Vec<usize> {
        let n = self.n_states;
        let mut block: Vec<usize> = vec![0; n];
        for _ in 0..n {
            // signature: per state, (symbol, target block) -> total probability
            let sigs: Vec<Vec<(usize, usize, f64)>> = (0..n)
                .map(|s| {
                    let mut m: BTreeMap<(usize, usize), f64> = BTreeMap::new();
                    for &(to, x, p) in &self.outgoing[s] {
                        *m.entry((x, block[to])).or_insert(0.0) += p;
                    }
                    m.into_iter().map(|((x, b), p)| (x, b, p)).collect()
                })
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                block[a]
                    .cmp(&block[b])
                    .then_with(|| sig_cmp(&sigs[a], &sigs[b]))
            });
            let mut next = vec![0usize; n];
            let mut current = 0usize;
            for w in 0..order.len() {
                if w > 0 {
                    let (a, b) = (order[w - 1], order[w]);
                    if block[a] != block[b] || !sig_eq(&sigs[a], &sigs[b]) {
                        current += 1;
                    }
                }
                next[order[w]] = current;
            }
            if next == block {
                break;
            }
            block = next;
        }
        // representative = smallest state index in the block
        let mut rep: HashMap<usize, usize> = HashMap::new();
        for (s, &b) in block.iter().enumerate() {
            rep.entry(b).or_insert(s);
        }
        block.iter().map(|b| rep[b]).collect()
    }
}

/// Maximum state count for the exact word-by-word morph comparison.
pub const MERGE_EXACT_MAX: usize = 16;

fn resolve(classes: &mut [usize], mut s: usize) -> usize {
    while classes[s] != s {
        classes[s] = classes[classes[s]];
        s = classes[s];
    }
    s
}

fn sig_cmp(a: &[(usize, usize, f64)], b: &[(usize, usize, f64)]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    for (ea, eb) in a.iter().zip(b.iter()) {
        let ord = ea.0.cmp(&eb.0).then(ea.1.cmp(&eb.1));
        if ord != Ordering::Equal {
            return ord;
        }
        if (ea.2 - eb.2).abs() > MORPH_TOL {
            return ea.2.partial_cmp(&eb.2).unwrap_or(Ordering::Equal);
        }
    }
    a.len().cmp(&b.len())
}

fn sig_eq(a: &[(usize, usize, f64)], b: &[(usize, usize, f64)]) -> bool {
    sig_cmp(a, b) == std::cmp::Ordering::Equal
}

fn compute_unifilar(outgoing: &[Vec<(usize, usize, f64)>]) -> bool {
    for out in outgoing {
        let mut target: HashMap<usize, usize> = HashMap::new();
        for &(to, x, _) in out {
            if let Some(&prev) = target.get(&x) {
                if prev != to {
                    return false;
                }
            } else {
                target.insert(x, to);
            }
        }
    }
    true
}

fn compute_retrodictive(per_symbol: &[Vec<(usize, usize, f64)>], n: usize) -> bool {
    for edges in per_symbol {
        let mut starts: HashMap<usize, usize> = HashMap::with_capacity(n);
        for &(to, from, _) in edges {
            if let Some(&prev) = starts.get(&to) {
                if prev != from {
                    return false;
                }
            } else {
                starts.insert(to, from);
            }
        }
    }
    true
}

/// Strong connectivity of the support digraph, checked exactly
/// (forward and backward reachability from state 0).
fn check_strong_connectivity(
    spec: &GeneratorSpec,
    outgoing: &[Vec<(usize, usize, f64)>],
    n: usize,
) -> Result<()> {
    let mut fwd = vec![Vec::new(); n];
    let mut bwd = vec![Vec::new(); n];
    for (s, out) in outgoing.iter().enumerate() {
        for &(to, _, _) in out {
            fwd[s].push(to);
            bwd[to].push(s);
        }
    }
    for (adj, dir) in [(&fwd, true), (&bwd, false)] {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(s) = stack.pop() {
            for &t in &adj[s] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        if let Some(u) = seen.iter().position(|&v| !v) {
            let (from, unreached) = if dir {
                (spec.states[0].clone(), spec.states[u].clone())
            } else {
                (spec.states[u].clone(), spec.states[0].clone())
            };
            return Err(Error::Reducibility { from, unreached });
        }
    }
    Ok(())
}

/// Size threshold below which the stationary distribution is solved by a
/// dense bordered LU system; above it a damped power iteration on the
/// sparse transition list is used.
const DENSE_STATIONARY_MAX: usize = 512;

fn solve_stationary(per_symbol: &[Vec<(usize, usize, f64)>], n: usize) -> Result<DVector<f64>> {
    let mut pi = if n <= DENSE_STATIONARY_MAX {
        stationary_dense(per_symbol, n)?
    } else {
        stationary_power(per_symbol, n)?
    };

    // negativity clipping, then renormalize
    for v in pi.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-12 {
                return Err(Error::Numerical(format!(
                    "stationary solve produced entry {v}"
                )));
            }
            *v = 0.0;
        }
    }
    pi /= pi.sum();

    let residual = stationary_residual(per_symbol, &pi);
    if residual > STATIONARY_TOL {
        return Err(Error::Numerical(format!(
            "stationary residual {residual} exceeds {STATIONARY_TOL}"
        )));
    }
    Ok(pi)
}

fn stationary_residual(per_symbol: &[Vec<(usize, usize, f64)>], pi: &DVector<f64>) -> f64 {
    let mut out = DVector::zeros(pi.len());
    for edges in per_symbol {
        for &(to, from, p) in edges {
            out[to] += p * pi[from];
        }
    }
    (out - pi).amax()
}

/// Solves (T - I) pi = 0 with the normalization row sum(pi) = 1 replacing
/// the last equation.
fn stationary_dense(per_symbol: &[Vec<(usize, usize, f64)>], n: usize) -> Result<DVector<f64>> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    for edges in per_symbol {
        for &(to, from, p) in edges {
            a[(to, from)] += p;
        }
    }
    for i in 0..n {
        a[(i, i)] -= 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    a.lu()
        .solve(&b)
        .ok_or_else(|| Error::Numerical("singular stationary system".into()))
}

/// Damped power iteration pi <- (pi + T pi) / 2; damping removes
/// periodicity without moving the fixed point.
fn stationary_power(per_symbol: &[Vec<(usize, usize, f64)>], n: usize) -> Result<DVector<f64>> {
    let mut pi = DVector::from_element(n, 1.0 / n as f64);
    let cap = 2_000_000usize;
    for _ in 0..cap {
        let mut next = DVector::zeros(n);
        for edges in per_symbol {
            for &(to, from, p) in edges {
                next[to] += p * pi[from];
            }
        }
        next = (&next + &pi) * 0.5;
        next /= next.sum();
        let diff = (&next - &pi).amax();
        pi = next;
        if diff < 1e-15 {
            return Ok(pi);
        }
    }
    Err(Error::Numerical(format!(
        "stationary power iteration did not converge within {cap} steps"
    )))
}

/// Randomized generator construction for property suites.
pub mod random {
    use super::*;
    use rand::Rng;

    /// Structural family to sample from.
    #[derive(Debug, Clone, Copy, PartialEq, Eq)]
    pub enum RandomKind {
        /// Unconstrained supports; generically non-unifilar.
        Dense,
        /// One end state per (state, symbol).
        Unifilar,
        /// Time reversal of a unifilar sample; co-unifilar by construction.
        Retrodictive,
    }

    /// Samples an irreducible generator with `n_states` states and
    /// `n_symbols` symbols. Probabilities are drawn from a coarse grid so
    /// that shared transitions produce overlaps well above test tolerances;
    /// samples are rejected until irreducible with min stationary mass 0.02.
    ///
    /// Dense and unifilar samples are additionally kept in general
    /// position, away from the structures where the quantum work advantage
    /// degenerates to zero despite strict memory compression:
    /// symbol-uniform overlap clusters are rejected exactly, and samples
    /// too close to the symbol-independent-end-state manifold (where the
    /// work gap is fourth-order suppressed) or with only marginal shared
    /// transitions are rejected by quantitative floors.
    pub fn random_generator<R: Rng>(
        rng: &mut R,
        n_states: usize,
        n_symbols: usize,
        kind: RandomKind,
    ) -> Generator {
        for _ in 0..100_000 {
            let gen = match kind {
                RandomKind::Dense => sample_dense(rng, n_states, n_symbols),
                RandomKind::Unifilar => sample_unifilar(rng, n_states, n_symbols),
                RandomKind::Retrodictive => {
                    let g = match sample_unifilar(rng, n_states, n_symbols) {
                        Some(g) => g,
                        None => continue,
                    };
                    Some(reverse(&g))
                }
            };
            if let Some(g) = gen {
                if g.stationary().min() < 0.05 {
                    continue;
                }
                if kind != RandomKind::Retrodictive {
                    if g.is_retrodictive() {
                        // flag-retrodictive samples are welcome but exempt
                        // from the strict-advantage floors
                        return g;
                    }
                    if g.has_symbol_uniform_overlap_clusters()
                        || g.strongest_shared_transition() < 0.25
                        || g.symbol_end_state_dependence() < 0.05
                    {
                        continue;
                    }
                }
                return g;
            }
        }
        panic!("failed to sample an irreducible generator");
    }

    // continuous weights bounded away from zero: overlaps stay macroscopic
    // and exact symmetric ties between branches have probability zero
    fn weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.25..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / total).collect()
    }

    fn build(n: usize, m: usize, edges: Vec<(usize, usize, usize, f64)>) -> Option<Generator> {
        let spec = GeneratorSpec {
            states: (0..n).map(|i| format!("s{i}")).collect(),
            alphabet: (0..m).map(|i| format!("{i}")).collect(),
            transitions: edges
                .into_iter()
                .map(|(from, to, x, p)| TransitionSpec {
                    from: format!("s{from}"),
                    to: format!("s{to}"),
                    symbol: format!("{x}"),
                    p,
                })
                .collect(),
        };
        Generator::from_spec(spec).ok()
    }

    fn sample_dense<R: Rng>(rng: &mut R, n: usize, m: usize) -> Option<Generator> {
        let mut edges = Vec::new();
        for s in 0..n {
            let slots = rng.random_range(2..=4.min(n * m));
            let mut chosen = Vec::new();
            while chosen.len() < slots {
                let slot = (rng.random_range(0..n), rng.random_range(0..m));
                if !chosen.contains(&slot) {
                    chosen.push(slot);
                }
            }
            chosen.sort_unstable();
            for ((to, x), p) in chosen.iter().zip(weights(rng, chosen.len())) {
                edges.push((s, *to, *x, p));
            }
        }
        build(n, m, edges)
    }

    fn sample_unifilar<R: Rng>(rng: &mut R, n: usize, m: usize) -> Option<Generator> {
        let mut edges = Vec::new();
        for s in 0..n {
            let mut syms: Vec<usize> = (0..m).filter(|_| rng.random_bool(0.7)).collect();
            if syms.is_empty() {
                syms.push(rng.random_range(0..m));
            }
            let ps = weights(rng, syms.len());
            for (x, p) in syms.into_iter().zip(ps) {
                edges.push((s, rng.random_range(0..n), x, p));
            }
        }
        build(n, m, edges)
    }

    /// Time reversal: R^x_{s's} = pi(s') T^x_{s,s'} / pi(s). Row-stochastic
    /// with the same stationary distribution; retrodictive iff the input is
    /// unifilar. Rows are renormalized to absorb the rounding of the
    /// stationary solve.
    pub fn reverse(gen: &Generator) -> Generator {
        let pi = gen.stationary();
        let mut edges = Vec::new();
        let mut row_sums = vec![0.0; gen.n_states()];
        for x in 0..gen.n_symbols() {
            for &(to, from, p) in gen.symbol_transitions(x) {
                row_sums[to] += pi[from] * p / pi[to];
            }
        }
        for x in 0..gen.n_symbols() {
            for &(to, from, p) in gen.symbol_transitions(x) {
                edges.push(TransitionSpec {
                    from: gen.state_label(to).to_string(),
                    to: gen.state_label(from).to_string(),
                    symbol: gen.symbol_label(x).to_string(),
                    p: (pi[from] * p / pi[to] / row_sums[to]).min(1.0),
                });
            }
        }
        let spec = GeneratorSpec {
            states: gen.spec().states.clone(),
            alphabet: gen.spec().alphabet.clone(),
            transitions: edges,
        };
        Generator::from_spec(spec).expect("time reversal of a valid generator is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renewal::{sns_a_spec, sns_b_auto, sns_c_auto};

    fn sns_a(p: f64) -> Generator {
        sns_a_spec(p).validate().unwrap()
    }

    #[test]
    fn validates_sns_a() {
        let g = sns_a(0.5);
        assert_eq!(g.n_states(), 2);
        assert!((g.stationary()[0] - 0.5).abs() < 1e-12);
        assert!((g.stationary()[1] - 0.5).abs() < 1e-12);
        assert!(!g.is_unifilar());
        assert!(!g.is_retrodictive());
    }

    #[test]
    fn single_state_self_loop() {
        let spec = GeneratorSpec {
            states: vec!["s".into()],
            alphabet: vec!["0".into()],
            transitions: vec![TransitionSpec {
                from: "s".into(),
                to: "s".into(),
                symbol: "0".into(),
                p: 1.0,
            }],
        };
        let g = spec.validate().unwrap();
        assert_eq!(g.stationary()[0], 1.0);
        assert!(g.is_unifilar());
        assert!(g.is_retrodictive());
        assert_eq!(g.entropy_rate_unifilar().unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_row_sum() {
        let spec = GeneratorSpec {
            states: vec!["a".into(), "b".into()],
            alphabet: vec!["0".into()],
            transitions: vec![
                TransitionSpec { from: "a".into(), to: "b".into(), symbol: "0".into(), p: 0.7 },
                TransitionSpec { from: "b".into(), to: "a".into(), symbol: "0".into(), p: 1.0 },
            ],
        };
        assert!(matches!(spec.validate(), Err(Error::RowSum { .. })));
    }

    #[test]
    fn rejects_disconnected_chain() {
        let spec = GeneratorSpec {
            states: vec!["a".into(), "b".into()],
            alphabet: vec!["0".into()],
            transitions: vec![
                TransitionSpec { from: "a".into(), to: "a".into(), symbol: "0".into(), p: 1.0 },
                TransitionSpec { from: "b".into(), to: "b".into(), symbol: "0".into(), p: 1.0 },
            ],
        };
        assert!(matches!(spec.validate(), Err(Error::Reducibility { .. })));
    }

    #[test]
    fn rejects_unknown_references() {
        let spec = GeneratorSpec {
            states: vec!["a".into()],
            alphabet: vec!["0".into()],
            transitions: vec![TransitionSpec {
                from: "a".into(),
                to: "zz".into(),
                symbol: "0".into(),
                p: 1.0,
            }],
        };
        assert!(matches!(spec.validate(), Err(Error::Alphabet { .. })));
    }

    #[test]
    fn word_probabilities_sns_a() {
        let g = sns_a(0.5);
        assert_eq!(g.word_probability(&Word::empty()).unwrap(), 1.0);
        let w = g.word_from_labels(&["1"]).unwrap();
        assert!((g.word_probability(&w).unwrap() - 0.25).abs() < 1e-15);
        assert!(g.word_from_labels(&["2"]).is_err());
    }

    #[test]
    fn word_probabilities_sum_to_one() {
        let g = sns_a(0.5);
        for l in 0..=8 {
            let total: f64 = g
                .word_distribution(l, DEFAULT_WORD_BUDGET)
                .unwrap()
                .iter()
                .map(|(_, p)| p)
                .sum();
            assert!((total - 1.0).abs() < 1e-9, "L={l}: total {total}");
        }
    }

    #[test]
    fn classification_of_sns_family() {
        assert!(!sns_a(0.5).is_unifilar());
        let b = sns_b_auto(0.5).unwrap();
        assert!(b.is_unifilar());
        assert!(!b.is_retrodictive());
        let c = sns_c_auto(0.5).unwrap();
        assert!(c.is_retrodictive());
        assert!(!c.is_unifilar());
    }

    #[test]
    fn period_two_cycle_is_retrodictive_with_zero_entropy_rate() {
        let spec = GeneratorSpec {
            states: vec!["a".into(), "b".into()],
            alphabet: vec!["0".into(), "1".into()],
            transitions: vec![
                TransitionSpec { from: "a".into(), to: "b".into(), symbol: "0".into(), p: 1.0 },
                TransitionSpec { from: "b".into(), to: "a".into(), symbol: "1".into(), p: 1.0 },
            ],
        };
        let g = spec.validate().unwrap();
        assert!(g.is_retrodictive());
        assert_eq!(g.entropy_rate_unifilar().unwrap(), 0.0);
        assert!(g.entropy_rate_estimate(8, DEFAULT_WORD_BUDGET).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fair_coin_entropy_rate() {
        let spec = GeneratorSpec {
            states: vec!["s".into()],
            alphabet: vec!["0".into(), "1".into()],
            transitions: vec![
                TransitionSpec { from: "s".into(), to: "s".into(), symbol: "0".into(), p: 0.5 },
                TransitionSpec { from: "s".into(), to: "s".into(), symbol: "1".into(), p: 0.5 },
            ],
        };
        let g = spec.validate().unwrap();
        assert!((g.entropy_rate_unifilar().unwrap() - 1.0).abs() < 1e-12);
        for l in 1..=6 {
            assert!((g.entropy_rate_estimate(l, DEFAULT_WORD_BUDGET).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn entropy_rate_estimate_rejects_oversized_tree() {
        let g = sns_a(0.5);
        assert!(matches!(g.block_entropies(14, 100), Err(Error::Resource(_))));
    }

    #[test]
    fn merge_collapses_duplicated_state() {
        // SNS-A with sigma1 cloned: sigma0 splits its outgoing 1/2 into 1/4 + 1/4.
        let spec = GeneratorSpec {
            states: vec!["s0".into(), "s1".into(), "s1x".into()],
            alphabet: vec!["0".into(), "1".into()],
            transitions: vec![
                TransitionSpec { from: "s0".into(), to: "s0".into(), symbol: "0".into(), p: 0.5 },
                TransitionSpec { from: "s0".into(), to: "s1".into(), symbol: "0".into(), p: 0.25 },
                TransitionSpec { from: "s0".into(), to: "s1x".into(), symbol: "0".into(), p: 0.25 },
                TransitionSpec { from: "s1".into(), to: "s0".into(), symbol: "1".into(), p: 0.5 },
                TransitionSpec { from: "s1".into(), to: "s1".into(), symbol: "0".into(), p: 0.5 },
                TransitionSpec { from: "s1x".into(), to: "s0".into(), symbol: "1".into(), p: 0.5 },
                TransitionSpec { from: "s1x".into(), to: "s1x".into(), symbol: "0".into(), p: 0.5 },
            ],
        };
        let g = spec.validate().unwrap();
        let merged = g.merge_equivalent_states();
        assert_eq!(merged.n_states(), 2);
        // word statistics preserved
        let a = sns_a(0.5);
        for l in 0..=8 {
            let da = a.word_distribution(l, DEFAULT_WORD_BUDGET).unwrap();
            let dm = merged.word_distribution(l, DEFAULT_WORD_BUDGET).unwrap();
            for ((wa, pa), (wm, pm)) in da.iter().zip(dm.iter()) {
                assert_eq!(wa, wm);
                assert!((pa - pm).abs() < 1e-9);
            }
        }
        // idempotent
        assert_eq!(merged.merge_equivalent_states().n_states(), 2);
    }

    #[test]
    fn merge_leaves_minimal_generators_unchanged() {
        let a = sns_a(0.5);
        assert_eq!(a.merge_equivalent_states().n_states(), 2);
        let b = sns_b_auto(0.5).unwrap();
        assert_eq!(b.merge_equivalent_states().n_states(), b.n_states());
    }

    #[test]
    fn stationary_matches_invariance_property() {
        let g = sns_b_auto(0.5).unwrap();
        let pi = g.stationary();
        let mut out = DVector::zeros(g.n_states());
        for x in 0..g.n_symbols() {
            out += g.propagate(x, pi);
        }
        assert!((out - pi).amax() < 1e-10);
    }

    #[test]
    fn random_generators_are_valid_and_classified() {
        use rand::SeedableRng;
        use random::{random_generator, RandomKind};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for kind in [RandomKind::Dense, RandomKind::Unifilar, RandomKind::Retrodictive] {
            for _ in 0..10 {
                let g = random_generator(&mut rng, 4, 2, kind);
                assert!(g.stationary().min() > 0.0);
                if kind == RandomKind::Retrodictive {
                    assert!(g.is_retrodictive());
                }
                if kind == RandomKind::Unifilar {
                    assert!(g.is_unifilar());
                }
            }
        }
    }
}
