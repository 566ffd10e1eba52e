//! Discrete renewal processes and the three Simple Nonunifilar Source
//! generators: the two-state nondeterministic generator A, the minimal
//! predictive (epsilon-machine) generator B, and the minimal retrodictive
//! generator C.
//!
//! B and C are infinite-state; they are built here with a controlled
//! truncation: the smallest N whose survival tail mass is below 1e-12
//! (capped at 10^4), with the last state's outgoing probabilities
//! renormalized onto a self-loop.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::generator::{Generator, GeneratorSpec, TransitionSpec};

/// Tail mass below which the truncation of an infinite-state renewal
/// generator is considered sound.
pub const TRUNCATION_TAIL: f64 = 1e-12;
/// Hard cap on auto-selected truncation depth.
pub const TRUNCATION_CAP: usize = 10_000;

/// SNS wait-time distribution `phi(n) = n p^{n-1} (1-p)^2`.
pub fn sns_wait_time(n: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    if n == 0 {
        return Ok(0.0);
    }
    Ok(n as f64 * p.powi(n as i32 - 1) * (1.0 - p) * (1.0 - p))
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
    }
    Ok(())
}

/// A discrete wait-time distribution phi(n), n >= 1, with a truncation
/// depth controlling how many counting states a generator built from it
/// keeps.
#[derive(Debug, Clone)]
pub struct RenewalFamily {
    wait: WaitTime,
    truncation: usize,
}

#[derive(Debug, Clone)]
enum WaitTime {
    /// phi(n) = n p^{n-1} (1-p)^2 with closed-form survival sums.
    Sns { p: f64 },
    /// Explicit table phi(1), phi(2), ...; survival by suffix sums.
    Table { phi: Vec<f64>, survival: Vec<f64> },
}

impl RenewalFamily {
    /// SNS family with the truncation auto-selected as the smallest N whose
    /// tail `sum_{n>N} Phi(n)` is below 1e-12, capped at 10^4.
    pub fn sns(p: f64) -> Result<Self> {
        let n = auto_truncation(p)?;
        Self::sns_with_truncation(p, n)
    }

    pub fn sns_with_truncation(p: f64, truncation: usize) -> Result<Self> {
        check_p(p)?;
        if truncation == 0 || truncation > TRUNCATION_CAP {
            return Err(Error::Domain(format!(
                "truncation {truncation} outside 1..={TRUNCATION_CAP}"
            )));
        }
        let fam = RenewalFamily { wait: WaitTime::Sns { p }, truncation };
        if fam.survival(truncation) < 1e-300 {
            return Err(Error::Domain(format!(
                "survival underflows at truncation {truncation} for p = {p}"
            )));
        }
        Ok(fam)
    }

    /// Family from an explicit wait-time table `phi(1), ..., phi(K)`.
    pub fn from_table(phi: Vec<f64>) -> Result<Self> {
        if phi.is_empty() {
            return Err(Error::Domain("empty wait-time table".into()));
        }
        if phi.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::Domain("wait-time table has negative entries".into()));
        }
        let total: f64 = phi.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "wait-time table sums to {total}, expected 1"
            )));
        }
        // survival[n] = sum_{m >= n} phi(m), survival[0] = 1
        let mut survival = vec![0.0; phi.len() + 2];
        for n in (1..=phi.len()).rev() {
            survival[n] = survival[n + 1] + phi[n - 1];
        }
        survival[0] = 1.0;
        let truncation = phi.len();
        Ok(RenewalFamily { wait: WaitTime::Table { phi, survival }, truncation })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn sns_p(&self) -> Option<f64> {
        match self.wait {
            WaitTime::Sns { p } => Some(p),
            WaitTime::Table { .. } => None,
        }
    }

    /// Wait-time probability phi(n).
    pub fn phi(&self, n: usize) -> f64 {
        match &self.wait {
            WaitTime::Sns { p } => {
                if n == 0 {
                    0.0
                } else {
                    n as f64 * p.powi(n as i32 - 1) * (1.0 - p) * (1.0 - p)
                }
            }
            WaitTime::Table { phi, .. } => {
                if n == 0 || n > phi.len() {
                    0.0
                } else {
                    phi[n - 1]
                }
            }
        }
    }

    /// Survival probability `Phi(n) = sum_{n' >= n} phi(n')`; `Phi(0) = 1`.
    pub fn survival(&self, n: usize) -> f64 {
        match &self.wait {
            WaitTime::Sns { p } => {
                if n == 0 {
                    1.0
                } else {
                    n as f64 * p.powi(n as i32 - 1) * (1.0 - p) + p.powi(n as i32)
                }
            }
            WaitTime::Table { survival, .. } => {
                if n >= survival.len() {
                    0.0
                } else {
                    survival[n]
                }
            }
        }
    }

    /// Mean firing rate `mu = 1 / sum_{n >= 0} Phi(n)`, evaluated over the
    /// truncated support (the dropped tail is below [`TRUNCATION_TAIL`] by
    /// construction for auto-truncated families).
    pub fn firing_rate(&self) -> f64 {
        let horizon = match &self.wait {
            WaitTime::Sns { .. } => self.truncation + 1,
            WaitTime::Table { phi, .. } => phi.len() + 1,
        };
        let total: f64 = (0..=horizon).map(|n| self.survival(n)).sum();
        1.0 / total
    }
}

/// Tail mass `sum_{n >= m} Phi(n)` of the SNS survival function, closed
/// form `p^{m-1} (m (1-p) + 2 p) / (1-p)` for m >= 1.
fn sns_survival_tail(p: f64, m: usize) -> f64 {
    debug_assert!(m >= 1);
    let q = 1.0 - p;
    p.powi(m as i32 - 1) * (m as f64 * q + 2.0 * p) / q
}

/// Smallest N with `sum_{n > N} Phi(n) < 1e-12`, capped at 10^4.
pub fn auto_truncation(p: f64) -> Result<usize> {
    check_p(p)?;
    for n in 1..=TRUNCATION_CAP {
        if sns_survival_tail(p, n + 1) < TRUNCATION_TAIL {
            return Ok(n);
        }
    }
    Ok(TRUNCATION_CAP)
}

fn two_symbol_alphabet() -> Vec<String> {
    vec!["0".into(), "1".into()]
}

/// Two-state nondeterministic SNS generator:
/// s0 -> s0 on 0 w.p. p, s0 -> s1 on 0 w.p. 1-p,
/// s1 -> s0 on 1 w.p. 1-p, s1 -> s1 on 0 w.p. p.
pub fn sns_a_spec(p: f64) -> GeneratorSpec {
    let t = |from: &str, to: &str, symbol: &str, p: f64| TransitionSpec {
        from: from.into(),
        to: to.into(),
        symbol: symbol.into(),
        p,
    };
    GeneratorSpec {
        states: vec!["s0".into(), "s1".into()],
        alphabet: two_symbol_alphabet(),
        transitions: vec![
            t("s0", "s0", "0", p),
            t("s0", "s1", "0", 1.0 - p),
            t("s1", "s0", "1", 1.0 - p),
            t("s1", "s1", "0", p),
        ],
    }
}

pub fn build_sns_a(p: f64) -> Result<Generator> {
    check_p(p)?;
    sns_a_spec(p).validate()
}

/// Emission probabilities of the truncated counting chain: state n emits 1
/// (resetting to state 0) w.p. `phi(n)/Phi(n)` and 0 otherwise; the last
/// state loops onto itself on 0.
fn emit_one_probs(fam: &RenewalFamily) -> Vec<f64> {
    (0..=fam.truncation).map(|n| fam.phi(n) / fam.survival(n)).collect()
}

/// Minimal predictive (epsilon-machine) SNS generator, truncated: states
/// s0..sN count the 0s since the last 1; stationary occupation reproduces
/// `P(sigma_n) = mu Phi(n)`.
pub fn sns_b_spec(fam: &RenewalFamily) -> GeneratorSpec {
    let n = fam.truncation;
    let p1 = emit_one_probs(fam);
    let states: Vec<String> = (0..=n).map(|i| format!("s{i}")).collect();
    let mut transitions = Vec::with_capacity(2 * (n + 1));
    for s in 0..=n {
        let next = (s + 1).min(n);
        if p1[s] > 0.0 {
            transitions.push(TransitionSpec {
                from: states[s].clone(),
                to: states[0].clone(),
                symbol: "1".into(),
                p: p1[s],
            });
        }
        let p0 = fam.survival(s + 1) / fam.survival(s);
        if p0 > 0.0 {
            transitions.push(TransitionSpec {
                from: states[s].clone(),
                to: states[next].clone(),
                symbol: "0".into(),
                p: p0,
            });
        }
    }
    GeneratorSpec { states, alphabet: two_symbol_alphabet(), transitions }
}

pub fn build_sns_b(p: f64, truncation: usize) -> Result<Generator> {
    sns_b_spec(&RenewalFamily::sns_with_truncation(p, truncation)?).validate()
}

pub fn sns_b_auto(p: f64) -> Result<Generator> {
    sns_b_spec(&RenewalFamily::sns(p)?).validate()
}

/// Minimal retrodictive SNS generator, truncated: state n holds the number
/// of 0s remaining before the next 1. From s0 a fresh wait n is drawn with
/// probability phi(n) (renormalized over the kept support) while emitting
/// the 1; every other state deterministically emits 0 counting down. The
/// joint statistics satisfy `P(1, sigma_n) = mu phi(n)` and
/// `P(0, sigma_n) = mu Phi(n+1)`.
pub fn sns_c_spec(fam: &RenewalFamily) -> GeneratorSpec {
    let n = fam.truncation;
    let states: Vec<String> = (0..=n).map(|i| format!("s{i}")).collect();
    let mut transitions = Vec::new();
    let kept_mass: f64 = (1..=n).map(|m| fam.phi(m)).sum();
    for m in 1..=n {
        transitions.push(TransitionSpec {
            from: states[0].clone(),
            to: states[m].clone(),
            symbol: "1".into(),
            p: fam.phi(m) / kept_mass,
        });
    }
    for s in 1..=n {
        transitions.push(TransitionSpec {
            from: states[s].clone(),
            to: states[s - 1].clone(),
            symbol: "0".into(),
            p: 1.0,
        });
    }
    GeneratorSpec { states, alphabet: two_symbol_alphabet(), transitions }
}

pub fn build_sns_c(p: f64, truncation: usize) -> Result<Generator> {
    sns_c_spec(&RenewalFamily::sns_with_truncation(p, truncation)?).validate()
}

pub fn sns_c_auto(p: f64) -> Result<Generator> {
    sns_c_spec(&RenewalFamily::sns(p)?).validate()
}

/// Explicit quantum memory states of the truncated predictive generator.
///
/// Column n holds the amplitudes `sqrt(phi-hat_n(k))` over the wait-to-next-1
/// grid k = 0..K, where phi-hat_n is the exact first-passage distribution of
/// the truncated counting chain from state n. Wherever the chain has not hit
/// the truncation boundary this equals the ideal `sqrt(phi(n'+n)/Phi(n))`;
/// beyond it the boundary self-loop continues the amplitudes geometrically,
/// so the columns are unit vectors in exact arithmetic. The grid K extends
/// until every column's residual survival is below 1e-18, then columns are
/// normalized.
pub fn quantum_renewal_states(fam: &RenewalFamily) -> DMatrix<f64> {
    let n = fam.truncation;
    let p1 = emit_one_probs(fam);

    // grid length: column 0 survives longest
    let mut k_max = 0usize;
    {
        let mut surv = 1.0f64;
        let mut s = 0usize;
        while surv > 1e-18 {
            surv *= 1.0 - p1[s];
            s = (s + 1).min(n);
            k_max += 1;
            if k_max > 64 * (n + 2) + 4096 {
                break; // self-loop escape probability bounded away from 1
            }
        }
    }

    let mut a = DMatrix::zeros(k_max + 1, n + 1);
    for col in 0..=n {
        let mut surv = 1.0f64;
        let mut s = col;
        for k in 0..=k_max {
            a[(k, col)] = (surv * p1[s]).sqrt();
            surv *= 1.0 - p1[s];
            s = (s + 1).min(n);
        }
        let norm = a.column(col).norm();
        for k in 0..=k_max {
            a[(k, col)] /= norm;
        }
    }
    a
}

/// Memory-state Gram matrix of the truncated predictive generator, solved
/// exactly by back-substitution of the overlap relations
/// `c_{mn} = sqrt(P1(m) P1(n)) + sqrt(P0(m) P0(n)) c_{m+1, n+1}`
/// (indices capped at the boundary state). Anti-diagonals only reference
/// already-solved entries, so a single sweep suffices; this is the exact
/// solution the phase-encoding fixed-point iteration converges to.
pub fn sns_b_gram(fam: &RenewalFamily) -> DMatrix<f64> {
    let n = fam.truncation;
    let p1 = emit_one_probs(fam);
    let p0: Vec<f64> = p1.iter().map(|&v| 1.0 - v).collect();
    let mut c = DMatrix::zeros(n + 1, n + 1);
    for m in 0..=n {
        c[(m, m)] = 1.0;
    }
    for d in 1..=n {
        for m in (0..=n - d).rev() {
            let k = m + d;
            let succ = (((m + 1).min(n)), ((k + 1).min(n)));
            let v = (p1[m] * p1[k]).sqrt() + (p0[m] * p0[k]).sqrt() * c[succ];
            c[(m, k)] = v;
            c[(k, m)] = v;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical;
    use crate::generator::DEFAULT_WORD_BUDGET;
    use crate::quantum;

    #[test]
    fn wait_time_basics() {
        assert_eq!(sns_wait_time(0, 0.5).unwrap(), 0.0);
        assert!((sns_wait_time(1, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!(sns_wait_time(1, 0.0).is_err());
        assert!(sns_wait_time(1, 1.0).is_err());
        let total: f64 = (1..=200).map(|n| sns_wait_time(n, 0.5).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn survival_and_firing_rate() {
        let fam = RenewalFamily::sns(0.5).unwrap();
        assert_eq!(fam.survival(0), 1.0);
        for n in 0..80 {
            assert!(fam.survival(n + 1) <= fam.survival(n) + 1e-15);
        }
        // sum_n Phi(n) = 4 at p = 1/2, so mu = 1/4
        assert!((fam.firing_rate() - 0.25).abs() < 1e-12);
        let fam9 = RenewalFamily::sns(0.9).unwrap();
        assert!((fam9.firing_rate() - 0.05).abs() < 1e-12);
        // closed-form tail agrees with direct summation
        let direct: f64 = (5..4000).map(|n| fam.survival(n)).sum();
        assert!((sns_survival_tail(0.5, 5) - direct).abs() < 1e-12);
    }

    #[test]
    fn deterministic_wait_has_firing_rate_half() {
        let fam = RenewalFamily::from_table(vec![1.0]).unwrap();
        assert_eq!(fam.survival(0), 1.0);
        assert_eq!(fam.survival(1), 1.0);
        assert_eq!(fam.survival(2), 0.0);
        assert!((fam.firing_rate() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn auto_truncation_is_tail_sound() {
        let n = auto_truncation(0.5).unwrap();
        assert!(sns_survival_tail(0.5, n + 1) < TRUNCATION_TAIL);
        assert!(n >= 2 && sns_survival_tail(0.5, n) >= TRUNCATION_TAIL);
    }

    #[test]
    fn sns_b_stationary_matches_mu_phi() {
        let fam = RenewalFamily::sns_with_truncation(0.5, 60).unwrap();
        let g = sns_b_spec(&fam).validate().unwrap();
        assert!(g.is_unifilar());
        let mu = fam.firing_rate();
        let pi = g.stationary();
        for n in 0..=60 {
            assert!(
                (pi[n] - mu * fam.survival(n)).abs() < 1e-9,
                "state {n}: {} vs {}",
                pi[n],
                mu * fam.survival(n)
            );
        }
    }

    #[test]
    fn sns_c_joint_identities() {
        let fam = RenewalFamily::sns_with_truncation(0.5, 60).unwrap();
        let g = sns_c_spec(&fam).validate().unwrap();
        assert!(g.is_retrodictive());
        assert!(!g.is_unifilar());
        let mu = fam.firing_rate();
        let joint = classical::joint_distribution(&g);
        // P(1, sigma_n) = mu phi(n), P(0, sigma_n) = mu Phi(n+1)
        for n in 0..=60 {
            assert!((joint[(n, 1)] - mu * fam.phi(n)).abs() < 1e-9);
            assert!((joint[(n, 0)] - mu * fam.survival(n + 1)).abs() < 1e-9);
        }
    }

    #[test]
    fn generators_share_word_statistics() {
        let a = build_sns_a(0.5).unwrap();
        let b = sns_b_auto(0.5).unwrap();
        let c = sns_c_auto(0.5).unwrap();
        for l in 0..=6 {
            let da = a.word_distribution(l, DEFAULT_WORD_BUDGET).unwrap();
            let db = b.word_distribution(l, DEFAULT_WORD_BUDGET).unwrap();
            let dc = c.word_distribution(l, DEFAULT_WORD_BUDGET).unwrap();
            // align supports: A may have zero-probability words that B/C prune
            use std::collections::HashMap;
            let map = |d: Vec<(Vec<usize>, f64)>| -> HashMap<Vec<usize>, f64> {
                d.into_iter().collect()
            };
            let (da, db, dc) = (map(da), map(db), map(dc));
            for (w, pa) in &da {
                let pb = db.get(w).copied().unwrap_or(0.0);
                let pc = dc.get(w).copied().unwrap_or(0.0);
                assert!((pa - pb).abs() < 1e-6, "word {w:?}: A {pa} vs B {pb}");
                assert!((pa - pc).abs() < 1e-6, "word {w:?}: A {pa} vs C {pc}");
            }
        }
    }

    #[test]
    fn renewal_states_are_normalized_and_match_gram_solve() {
        let fam = RenewalFamily::sns_with_truncation(0.5, 46).unwrap();
        let a = quantum_renewal_states(&fam);
        for col in 0..=46 {
            assert!((a.column(col).norm() - 1.0).abs() < 1e-9);
        }
        let explicit = a.transpose() * &a;
        let solved = sns_b_gram(&fam);
        let dev = (&explicit - &solved).amax();
        assert!(dev < 1e-9, "max gram deviation {dev}");
    }

    #[test]
    fn renewal_gram_matches_phase_encoding_fixed_point() {
        let fam = RenewalFamily::sns_with_truncation(0.5, 46).unwrap();
        let g = sns_b_spec(&fam).validate().unwrap();
        let fixed =
            quantum::solve_overlaps(&g, &quantum::EncodingScheme::zero_phases(&g)).unwrap();
        let solved = sns_b_gram(&fam);
        let dev = (&solved - fixed.real_part()).amax();
        assert!(dev < 1e-9, "max deviation {dev}");
    }

    #[test]
    fn table_one_quantum_entropy_for_b() {
        let fam = RenewalFamily::sns(0.5).unwrap();
        let g = sns_b_spec(&fam).validate().unwrap();
        let gram = sns_b_gram(&fam);
        let mem = quantum::memory_costs_real(&gram, g.stationary()).unwrap();
        assert!((mem.c_bits - 0.386).abs() < 0.005, "C_qB = {}", mem.c_bits);
    }

    #[test]
    fn truncation_soundness() {
        let costs = |p: f64, n: usize| {
            let fam = RenewalFamily::sns_with_truncation(p, n).unwrap();
            let g = sns_b_spec(&fam).validate().unwrap();
            let (_, c_c) = classical::classical_memory(&g);
            let w_c = classical::classical_work(&g);
            let gram = sns_b_gram(&fam);
            let mem = quantum::memory_costs_real(&gram, g.stationary()).unwrap();
            let w_q = quantum::work_cost_real(&g, &gram).unwrap();
            [c_c, w_c, mem.c_bits, w_q]
        };
        // doubling a tail-sound truncation leaves every cost unchanged;
        // depth 60 is tail-sound up to p = 0.6 (survival tail below 1e-12)
        for p in [0.5, 0.6] {
            let shallow = costs(p, 60);
            let deep = costs(p, 120);
            for (a, b) in shallow.iter().zip(deep) {
                assert!((a - b).abs() < 1e-9, "p = {p}: {a} vs {b}");
            }
        }
        // closer to p = 1 the sound depth grows; compare auto against deeper
        for p in [0.7, 0.8, 0.9] {
            let n_auto = auto_truncation(p).unwrap();
            let shallow = costs(p, n_auto);
            let deep = costs(p, n_auto + 100);
            for (a, b) in shallow.iter().zip(deep) {
                assert!((a - b).abs() < 1e-9, "p = {p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn b_and_c_share_classical_memory_cost() {
        let fam = RenewalFamily::sns(0.5).unwrap();
        let b = sns_b_spec(&fam).validate().unwrap();
        let c = sns_c_spec(&fam).validate().unwrap();
        let (_, c_b) = classical::classical_memory(&b);
        let (_, c_c) = classical::classical_memory(&c);
        assert!((c_b - c_c).abs() < 1e-6);
    }

    #[test]
    fn renewal_states_gram_gives_table_entropy() {
        let fam = RenewalFamily::sns(0.5).unwrap();
        let g = sns_b_spec(&fam).validate().unwrap();
        let states = quantum_renewal_states(&fam);
        let gram = states.transpose() * &states;
        let mem = quantum::memory_costs_real(&gram, g.stationary()).unwrap();
        assert!((mem.c_bits - 0.386).abs() < 0.005);
    }

    #[test]
    fn builders_reject_bad_parameters() {
        assert!(build_sns_a(1.0).is_err());
        assert!(build_sns_a(0.0).is_err());
        assert!(build_sns_b(0.5, 0).is_err());
        assert!(RenewalFamily::sns_with_truncation(0.5, 9000).is_err()); // survival underflow
        assert!(RenewalFamily::from_table(vec![0.5, 0.4]).is_err()); // not normalized
    }
}
