//! Quantum implementation of a generator: memory-state overlaps, Gram
//! spectra, explicit state embeddings, the transition isometry with its
//! decohering output and discarded auxiliary registers, and the resulting
//! memory and work costs.
//!
//! The construction maps generator states to (generally non-orthogonal)
//! memory states |sigma_s> and realizes one time step as
//! `|sigma_s>|0>|0> -> sum_{s',x} sqrt(T^x_{s's}) |sigma_{s'}>|x> psi(s,s',x)`,
//! followed by dephasing of the output register and discarding the
//! auxiliary register.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::generator::{Generator, Word};
use crate::numeric::round_sig;
use crate::spectra;

/// Max-entry convergence tolerance of the overlap fixed point.
pub const OVERLAP_TOL: f64 = 1e-12;
/// Iteration cap of the overlap fixed point.
pub const OVERLAP_MAX_ITER: usize = 100_000;
/// Orthonormality tolerance for auxiliary encodings.
pub const ENCODING_TOL: f64 = 1e-10;
/// Entrywise tolerance on Gram(Y) = Gram(A) when building the isometry.
pub const ISOMETRY_TOL: f64 = 1e-9;

/// Auxiliary-system encoding `psi(s, s', x)` imprinted on each transition.
///
/// For each fixed (s, x) the vectors over possible end states s' must be
/// orthonormal; this is what breaks superpositions of distinct end memory
/// states.
#[derive(Debug, Clone)]
pub enum EncodingScheme {
    /// `psi(s, s', x) = |s'>`: the end-state label, always admissible.
    EndStateLabel,
    /// One-dimensional auxiliary space carrying only a phase
    /// `e^{i phi[s, x]}`; admissible only for unifilar generators, where a
    /// single end state exists per (s, x).
    PhaseOnly(DMatrix<f64>),
    /// Explicit vectors in an auxiliary space of dimension `dim`, keyed by
    /// (s, s', x).
    Custom { dim: usize, psi: HashMap<(usize, usize, usize), DVector<Complex64>> },
}

impl EncodingScheme {
    /// Zero-phase encoding for a unifilar generator.
    pub fn zero_phases(gen: &Generator) -> Self {
        EncodingScheme::PhaseOnly(DMatrix::zeros(gen.n_states(), gen.n_symbols()))
    }

    /// Auxiliary-register dimension for `gen`.
    pub fn aux_dim(&self, gen: &Generator) -> usize {
        match self {
            EncodingScheme::EndStateLabel => gen.n_states(),
            EncodingScheme::PhaseOnly(_) => 1,
            EncodingScheme::Custom { dim, .. } => *dim,
        }
    }

    /// Validates admissibility for `gen`: shape checks plus the per-(s, x)
    /// orthonormality condition on end-state vectors.
    pub fn validate(&self, gen: &Generator) -> Result<()> {
        match self {
            EncodingScheme::EndStateLabel => Ok(()),
            EncodingScheme::PhaseOnly(phases) => {
                if !gen.is_unifilar() {
                    return Err(Error::Encoding(
                        "phase-only encoding requires a unifilar generator".into(),
                    ));
                }
                if phases.nrows() != gen.n_states() || phases.ncols() != gen.n_symbols() {
                    return Err(Error::Encoding(format!(
                        "phase table is {}x{}, expected {}x{}",
                        phases.nrows(),
                        phases.ncols(),
                        gen.n_states(),
                        gen.n_symbols()
                    )));
                }
                Ok(())
            }
            EncodingScheme::Custom { dim, psi } => {
                for s in 0..gen.n_states() {
                    let mut by_symbol: std::collections::BTreeMap<usize, Vec<usize>> =
                        std::collections::BTreeMap::new();
                    for &(to, x, _) in gen.outgoing(s) {
                        by_symbol.entry(x).or_default().push(to);
                    }
                    for (x, ends) in by_symbol {
                        let vecs: Vec<&DVector<Complex64>> = ends
                            .iter()
                            .map(|&to| {
                                psi.get(&(s, to, x)).ok_or_else(|| {
                                    Error::Encoding(format!(
                                        "missing psi({s}, {to}, {x})"
                                    ))
                                })
                            })
                            .collect::<Result<_>>()?;
                        for (i, vi) in vecs.iter().enumerate() {
                            if vi.len() != *dim {
                                return Err(Error::Encoding(format!(
                                    "psi vector has dimension {}, declared {dim}",
                                    vi.len()
                                )));
                            }
                            for (j, vj) in vecs.iter().enumerate() {
                                let inner: Complex64 = vi.dotc(vj);
                                let target = if i == j { 1.0 } else { 0.0 };
                                if (inner - Complex64::new(target, 0.0)).norm() > ENCODING_TOL {
                                    return Err(Error::Encoding(format!(
                                        "psi vectors for state {s}, symbol {x} are not \
                                         orthonormal: |<psi_{i}|psi_{j}> - {target}| = {}",
                                        (inner - Complex64::new(target, 0.0)).norm()
                                    )));
                                }
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Inner product `<psi(j, j', x) | psi(k, k', x)>`.
    fn inner(&self, j: usize, jp: usize, k: usize, kp: usize, x: usize) -> Complex64 {
        match self {
            EncodingScheme::EndStateLabel => {
                if jp == kp {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                }
            }
            EncodingScheme::PhaseOnly(phases) => {
                Complex64::from_polar(1.0, phases[(k, x)] - phases[(j, x)])
            }
            EncodingScheme::Custom { psi, .. } => {
                psi[&(j, jp, x)].dotc(&psi[&(k, kp, x)])
            }
        }
    }

    /// Materializes `psi(s, s', x)` as a vector in the auxiliary space.
    fn vector(&self, gen: &Generator, s: usize, sp: usize, x: usize) -> DVector<Complex64> {
        match self {
            EncodingScheme::EndStateLabel => {
                let mut v = DVector::zeros(gen.n_states());
                v[sp] = Complex64::ONE;
                v
            }
            EncodingScheme::PhaseOnly(phases) => {
                DVector::from_element(1, Complex64::from_polar(1.0, phases[(s, x)]))
            }
            EncodingScheme::Custom { psi, .. } => psi[&(s, sp, x)].clone(),
        }
    }
}

/// Hermitian matrix of pairwise memory-state overlaps `<sigma_j|sigma_k>`
/// with unit diagonal.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    entries: DMatrix<Complex64>,
}

impl GramMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() {
            return Err(Error::Shape(format!(
                "{}x{} Gram matrix is not square",
                n,
                entries.ncols()
            )));
        }
        for j in 0..n {
            if (entries[(j, j)] - Complex64::ONE).norm() > 1e-9 {
                return Err(Error::Numerical(format!(
                    "Gram diagonal entry {j} is {} instead of 1",
                    entries[(j, j)]
                )));
            }
            for k in 0..n {
                if (entries[(j, k)] - entries[(k, j)].conj()).norm() > 1e-9 {
                    return Err(Error::Numerical("Gram matrix is not Hermitian".into()));
                }
                if entries[(j, k)].norm() > 1.0 + 1e-9 {
                    return Err(Error::Numerical(format!(
                        "Gram entry ({j}, {k}) has modulus {} > 1",
                        entries[(j, k)].norm()
                    )));
                }
            }
        }
        Ok(GramMatrix { entries })
    }

    pub fn from_real(entries: &DMatrix<f64>) -> Result<Self> {
        GramMatrix::new(entries.map(|v| Complex64::new(v, 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        GramMatrix { entries: DMatrix::identity(n, n) }
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn entry(&self, j: usize, k: usize) -> Complex64 {
        self.entries[(j, k)]
    }

    /// True when every imaginary part is negligible.
    pub fn is_real(&self) -> bool {
        self.entries.iter().all(|z| z.im.abs() < 1e-13)
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }

    /// Largest off-diagonal modulus.
    pub fn max_offdiag(&self) -> f64 {
        let n = self.n();
        let mut m: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                if j != k {
                    m = m.max(self.entries[(j, k)].norm());
                }
            }
        }
        m
    }
}

/// Solves the memory-state overlaps for `gen` under encoding `enc` as the
/// fixed point of
/// `c_jk <- sum_{j'k'x} sqrt(T^x_{j'j} T^x_{k'k}) <psi(j,j',x)|psi(k,k',x)> c_j'k'`,
/// iterating synchronously from the all-ones matrix.
///
/// Under the end-state-label encoding the auxiliary overlap collapses to
/// `delta_{j'k'}` and the map closes after a single evaluation, reproducing
/// the unitarity relation `c_jk = sum_{j'x} sqrt(T^x_{j'j} T^x_{j'k})`
/// exactly.
pub fn solve_overlaps(gen: &Generator, enc: &EncodingScheme) -> Result<GramMatrix> {
    enc.validate(gen)?;
    let n = gen.n_states();
    // outgoing transitions grouped per (state, symbol)
    let mut out: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); gen.n_symbols()]; n];
    for (s, rows) in out.iter_mut().enumerate() {
        for &(to, x, p) in gen.outgoing(s) {
            rows[x].push((to, p.sqrt()));
        }
    }

    let mut c = DMatrix::from_element(n, n, Complex64::ONE);
    for _ in 0..OVERLAP_MAX_ITER {
        let mut next = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in 0..n {
                let mut acc = Complex64::ZERO;
                for (x, row_j) in out[j].iter().enumerate() {
                    for &(jp, rpj) in row_j {
                        for &(kp, rpk) in &out[k][x] {
                            let ip = enc.inner(j, jp, k, kp, x);
                            if ip != Complex64::ZERO {
                                acc += ip * c[(jp, kp)].scale(rpj * rpk);
                            }
                        }
                    }
                }
                next[(j, k)] = acc;
            }
        }
        let diff = (&next - &c).iter().fold(0.0f64, |a, z| a.max(z.norm()));
        c = next;
        if diff < OVERLAP_TOL {
            return GramMatrix::new(c);
        }
    }
    Err(Error::Convergence(OVERLAP_MAX_ITER))
}

/// Memory costs of a quantum implementation.
#[derive(Debug, Clone)]
pub struct QuantumMemory {
    /// log2 of the numerical rank of the stationary memory state.
    pub d_bits: f64,
    /// Von Neumann entropy of the stationary memory state, in bits.
    pub c_bits: f64,
    pub rank: usize,
    /// Spectrum of the Gram form of the stationary state, descending.
    pub spectrum: Vec<f64>,
}

fn memory_from_spectrum(spectrum: Vec<f64>) -> Result<QuantumMemory> {
    spectra::check_psd(&spectrum)?;
    let rank = spectra::rank_of_spectrum(&spectrum);
    Ok(QuantumMemory {
        d_bits: (rank.max(1) as f64).log2(),
        c_bits: spectra::entropy_of_spectrum(&spectrum),
        rank,
        spectrum,
    })
}

fn check_distribution(pi: &DVector<f64>, n: usize) -> Result<()> {
    if pi.len() != n {
        return Err(Error::Shape(format!(
            "distribution has {} entries, Gram matrix has {n}",
            pi.len()
        )));
    }
    if (pi.sum() - 1.0).abs() > 1e-9 || pi.iter().any(|&p| p < -1e-12) {
        return Err(Error::Domain("stationary vector is not a distribution".into()));
    }
    Ok(())
}

/// Memory costs from the Gram form
/// `rho_G = sqrt(pi_j pi_k) c_jk`, which shares its spectrum with the
/// stationary memory state `sum_s pi(s) |sigma_s><sigma_s|`.
pub fn quantum_memory(gram: &GramMatrix, pi: &DVector<f64>) -> Result<QuantumMemory> {
    check_distribution(pi, gram.n())?;
    let w: Vec<f64> = pi.iter().copied().collect();
    let spectrum = if gram.is_real() {
        spectra::eigenvalues_real(&spectra::scale_by_weights_real(&gram.real_part(), &w))?
    } else {
        spectra::eigenvalues_complex(&spectra::scale_by_weights_complex(gram.entries(), &w))?
    };
    memory_from_spectrum(spectrum)
}

/// Real-Gram variant of [`quantum_memory`], used on large truncated
/// generators where the complex wrapper would double memory traffic.
pub fn memory_costs_real(gram: &DMatrix<f64>, pi: &DVector<f64>) -> Result<QuantumMemory> {
    check_distribution(pi, gram.nrows())?;
    let w: Vec<f64> = pi.iter().copied().collect();
    let spectrum = spectra::eigenvalues_real(&spectra::scale_by_weights_real(gram, &w))?;
    memory_from_spectrum(spectrum)
}

fn block_entropy_real(gen: &Generator, gram: &DMatrix<f64>) -> Result<f64> {
    let pi = gen.stationary();
    let mut total = 0.0;
    for x in 0..gen.n_symbols() {
        let mut q = vec![0.0; gen.n_states()];
        for &(to, from, p) in gen.symbol_transitions(x) {
            q[to] += pi[from] * p;
        }
        let support: Vec<usize> =
            (0..gen.n_states()).filter(|&s| q[s] > 1e-15).collect();
        if support.is_empty() {
            continue;
        }
        let sub = DMatrix::from_fn(support.len(), support.len(), |i, j| {
            gram[(support[i], support[j])]
        });
        let w: Vec<f64> = support.iter().map(|&s| q[s]).collect();
        let spectrum = spectra::eigenvalues_real(&spectra::scale_by_weights_real(&sub, &w))?;
        spectra::check_psd(&spectrum)?;
        total += spectra::entropy_of_spectrum(&spectrum);
    }
    Ok(total)
}

fn block_entropy_complex(gen: &Generator, gram: &DMatrix<Complex64>) -> Result<f64> {
    let pi = gen.stationary();
    let mut total = 0.0;
    for x in 0..gen.n_symbols() {
        let mut q = vec![0.0; gen.n_states()];
        for &(to, from, p) in gen.symbol_transitions(x) {
            q[to] += pi[from] * p;
        }
        let support: Vec<usize> =
            (0..gen.n_states()).filter(|&s| q[s] > 1e-15).collect();
        if support.is_empty() {
            continue;
        }
        let sub = DMatrix::from_fn(support.len(), support.len(), |i, j| {
            gram[(support[i], support[j])]
        });
        let w: Vec<f64> = support.iter().map(|&s| q[s]).collect();
        let spectrum =
            spectra::eigenvalues_complex(&spectra::scale_by_weights_complex(&sub, &w))?;
        spectra::check_psd(&spectrum)?;
        total += spectra::entropy_of_spectrum(&spectrum);
    }
    Ok(total)
}

/// Work per step of the quantum implementation, units k_B T ln 2:
/// `W = S(rho) - S(rho_{S'X})`.
///
/// `rho_{S'X}` is block-diagonal over the emitted symbol; block x carries
/// end-state weights `q_x(s') = sum_s pi(s) T^x_{s's}` and its spectrum is
/// that of the weighted Gram matrix `sqrt(q_x(j) q_x(k)) c_jk`. The total
/// entropy of the joint state is the entropy of the union of all block
/// spectra.
pub fn quantum_work(gen: &Generator, gram: &GramMatrix) -> Result<f64> {
    if gram.n() != gen.n_states() {
        return Err(Error::Shape(format!(
            "Gram matrix of size {} for generator with {} states",
            gram.n(),
            gen.n_states()
        )));
    }
    let mem = quantum_memory(gram, gen.stationary())?;
    let joint_entropy = if gram.is_real() {
        block_entropy_real(gen, &gram.real_part())?
    } else {
        block_entropy_complex(gen, gram.entries())?
    };
    Ok(mem.c_bits - joint_entropy)
}

/// Real-Gram variant of [`quantum_work`].
pub fn work_cost_real(gen: &Generator, gram: &DMatrix<f64>) -> Result<f64> {
    let mem = memory_costs_real(gram, gen.stationary())?;
    Ok(mem.c_bits - block_entropy_real(gen, gram)?)
}

/// Explicit memory-state vectors from a Gram matrix: a rank x |S| matrix
/// `A` with `A^dagger A = gram`; column s is |sigma_s> in an orthonormal
/// basis of the memory space (reverse Gram-Schmidt via the
/// eigendecomposition route).
pub fn embed_states(gram: &GramMatrix) -> Result<DMatrix<Complex64>> {
    spectra::psd_embedding(gram.entries())
}

/// The transition isometry `V` together with its register layout.
///
/// `V` maps the memory space (dimension `mem_dim`) into
/// memory (x) output (x) auxiliary; the flattened row index is
/// `(m * n_symbols + x) * aux_dim + a`.
#[derive(Debug, Clone)]
pub struct ChannelIsometry {
    v: DMatrix<Complex64>,
    mem_dim: usize,
    n_symbols: usize,
    aux_dim: usize,
}

impl ChannelIsometry {
    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.v
    }

    pub fn mem_dim(&self) -> usize {
        self.mem_dim
    }

    pub fn n_symbols(&self) -> usize {
        self.n_symbols
    }

    pub fn aux_dim(&self) -> usize {
        self.aux_dim
    }

    #[inline]
    fn idx(&self, m: usize, x: usize, a: usize) -> usize {
        (m * self.n_symbols + x) * self.aux_dim + a
    }

    /// One channel step: `V rho V^dagger`, dephasing of the output register
    /// in its computational basis, and partial trace over the auxiliary
    /// register. Returns the joint memory (x) output state with row index
    /// `m * n_symbols + x`.
    pub fn apply_channel(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        if rho.nrows() != self.mem_dim || rho.ncols() != self.mem_dim {
            return Err(Error::Shape(format!(
                "memory state is {}x{}, expected {}x{}",
                rho.nrows(),
                rho.ncols(),
                self.mem_dim,
                self.mem_dim
            )));
        }
        let trace_dev = (rho.trace() - Complex64::ONE).norm();
        if trace_dev > 1e-9 {
            return Err(Error::Trace(trace_dev));
        }
        let big = &self.v * rho * self.v.adjoint();
        let d = self.mem_dim * self.n_symbols;
        let mut joint = DMatrix::zeros(d, d);
        for x in 0..self.n_symbols {
            for m in 0..self.mem_dim {
                for mp in 0..self.mem_dim {
                    let mut acc = Complex64::ZERO;
                    for a in 0..self.aux_dim {
                        acc += big[(self.idx(m, x, a), self.idx(mp, x, a))];
                    }
                    joint[(m * self.n_symbols + x, mp * self.n_symbols + x)] = acc;
                }
            }
        }
        Ok(joint)
    }

    /// Unnormalized conditional memory update for emitting symbol `x`:
    /// `rho -> sum_a E_{x,a} rho E_{x,a}^dagger` with
    /// `E_{x,a} = (I (x) <x| (x) <a|) V`. The trace of the result is the
    /// probability of emitting `x`.
    pub fn symbol_map(&self, rho: &DMatrix<Complex64>, x: usize) -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(self.mem_dim, self.mem_dim);
        for a in 0..self.aux_dim {
            let e = DMatrix::from_fn(self.mem_dim, self.mem_dim, |m_out, m_in| {
                self.v[(self.idx(m_out, x, a), m_in)]
            });
            out += &e * rho * e.adjoint();
        }
        out
    }

    /// Distribution over length-`l` output words obtained by iterating the
    /// channel from `rho0`, collecting the dephased output register each
    /// step. Words are in lexicographic order of symbol indices.
    pub fn word_distribution(&self, rho0: &DMatrix<Complex64>, l: usize) -> Vec<(Vec<usize>, f64)> {
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.word_walk(rho0, l, &mut prefix, &mut out);
        out
    }

    fn word_walk(
        &self,
        rho: &DMatrix<Complex64>,
        remaining: usize,
        prefix: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        if remaining == 0 {
            out.push((prefix.clone(), rho.trace().re));
            return;
        }
        for x in 0..self.n_symbols {
            let next = self.symbol_map(rho, x);
            if next.trace().re > 1e-300 {
                prefix.push(x);
                self.word_walk(&next, remaining - 1, prefix, out);
                prefix.pop();
            }
        }
    }
}

/// Builds the transition isometry for `gen` from an embedding `emb`
/// (columns are memory-state vectors) under encoding `enc`.
///
/// Target vectors `y_s = sum_{s'x} sqrt(T^x_{s's}) |sigma_{s'}>|x> psi(s,s',x)`
/// must reproduce the memory-state Gram matrix (this is exactly the
/// unitarity relation behind the overlap solver); `V` is then the
/// least-squares map with `V |sigma_s> = y_s` on the span of the memory
/// states. The embedding spans the whole memory space, so no orthocomplement
/// extension is required.
pub fn build_isometry(
    gen: &Generator,
    emb: &DMatrix<Complex64>,
    enc: &EncodingScheme,
) -> Result<ChannelIsometry> {
    enc.validate(gen)?;
    let n = gen.n_states();
    if emb.ncols() != n {
        return Err(Error::Shape(format!(
            "embedding has {} columns, generator has {n} states",
            emb.ncols()
        )));
    }
    let r = emb.nrows();
    let aux = enc.aux_dim(gen);
    let m_sym = gen.n_symbols();
    let big = r * m_sym * aux;

    let mut y = DMatrix::<Complex64>::zeros(big, n);
    for s in 0..n {
        for &(to, x, p) in gen.outgoing(s) {
            let psi = enc.vector(gen, s, to, x);
            let amp = p.sqrt();
            for m in 0..r {
                let base = emb[(m, to)].scale(amp);
                for a in 0..aux {
                    y[((m * m_sym + x) * aux + a, s)] += base * psi[a];
                }
            }
        }
    }

    let gram_y = y.adjoint() * &y;
    let gram_a = emb.adjoint() * emb;
    let dev = (&gram_y - &gram_a).iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if dev > ISOMETRY_TOL {
        return Err(Error::Consistency(dev));
    }

    // V = Y A^dagger (A A^dagger)^{-1}; A has full row rank by construction.
    let aat = emb * emb.adjoint();
    let inv = aat
        .try_inverse()
        .ok_or_else(|| Error::Numerical("embedding normal matrix is singular".into()))?;
    let v = &y * emb.adjoint() * inv;

    Ok(ChannelIsometry { v, mem_dim: r, n_symbols: m_sym, aux_dim: aux })
}

/// Stationary memory state `sum_s pi(s) |sigma_s><sigma_s|` in the
/// embedding basis.
pub fn stationary_memory_state(gen: &Generator, emb: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let pi = gen.stationary();
    let r = emb.nrows();
    let mut rho = DMatrix::zeros(r, r);
    for s in 0..gen.n_states() {
        let col = emb.column(s);
        rho += (col * col.adjoint()).scale(pi[s]);
    }
    rho
}

/// Right-hand side of the defining channel relation on a basis state:
/// `sum_{s'x} T^x_{s's} |sigma_{s'}><sigma_{s'}| (x) |x><x|` with joint
/// index `m * n_symbols + x`.
pub fn expected_basis_output(
    gen: &Generator,
    emb: &DMatrix<Complex64>,
    s: usize,
) -> DMatrix<Complex64> {
    let r = emb.nrows();
    let m_sym = gen.n_symbols();
    let d = r * m_sym;
    let mut joint = DMatrix::zeros(d, d);
    for &(to, x, p) in gen.outgoing(s) {
        let col = emb.column(to);
        let outer = (col * col.adjoint()).scale(p);
        for m in 0..r {
            for mp in 0..r {
                joint[(m * m_sym + x, mp * m_sym + x)] += outer[(m, mp)];
            }
        }
    }
    joint
}

/// Samples a length-`l` output word: the start state is drawn from the
/// stationary distribution, then `l` transitions from the sparse tensor.
/// Deterministic for a fixed seed.
pub fn sample_trajectory(gen: &Generator, l: usize, seed: u64) -> Word {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = gen.stationary();
    let mut u: f64 = rng.random();
    let mut state = gen.n_states() - 1;
    for s in 0..gen.n_states() {
        if u < pi[s] {
            state = s;
            break;
        }
        u -= pi[s];
    }
    let mut word = Vec::with_capacity(l);
    for _ in 0..l {
        let mut u: f64 = rng.random();
        let out = gen.outgoing(state);
        let (mut to, mut x) = (out[0].0, out[0].1);
        for &(t, sym, p) in out {
            if u < p {
                to = t;
                x = sym;
                break;
            }
            u -= p;
            to = t;
            x = sym;
        }
        word.push(x);
        state = to;
    }
    Word(word)
}

/// Costs and artifacts of a quantum implementation.
#[derive(Debug, Clone)]
pub struct QuantumReport {
    pub d_bits: f64,
    pub c_bits: f64,
    pub work: f64,
    pub rank: usize,
    pub gram: GramMatrix,
    pub spectrum: Vec<f64>,
    /// Explicit memory-state vectors (rank x |S|); omitted for generators
    /// too large for a dense eigendecomposition.
    pub state_vectors: Option<DMatrix<Complex64>>,
}

/// Builds the full quantum report for `gen` under `enc`.
pub fn quantum_report(gen: &Generator, enc: &EncodingScheme) -> Result<QuantumReport> {
    let gram = solve_overlaps(gen, enc)?;
    let mem = quantum_memory(&gram, gen.stationary())?;
    let work = quantum_work(gen, &gram)?;
    let state_vectors = if gen.n_states() <= 600 { Some(embed_states(&gram)?) } else { None };
    Ok(QuantumReport {
        d_bits: mem.d_bits,
        c_bits: mem.c_bits,
        work,
        rank: mem.rank,
        spectrum: mem.spectrum,
        gram,
        state_vectors,
    })
}

impl QuantumReport {
    /// JSON form `{D, C, W, rank, gram, spectrum}`; the Gram matrix is
    /// row-major with complex entries as `[re, im]` pairs, floats rounded
    /// to 12 significant digits.
    pub fn to_json(&self) -> Value {
        let n = self.gram.n();
        let mut gram = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                let z = self.gram.entry(j, k);
                gram.push(json!([round_sig(z.re, 12), round_sig(z.im, 12)]));
            }
        }
        json!({
            "D": round_sig(self.d_bits, 12),
            "C": round_sig(self.c_bits, 12),
            "W": round_sig(self.work, 12),
            "rank": self.rank,
            "gram": gram,
            "spectrum": self.spectrum.iter().map(|&l| round_sig(l, 12)).collect::<Vec<_>>(),
        })
    }
}
