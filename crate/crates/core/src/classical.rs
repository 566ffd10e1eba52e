//! Memory and work costs of the classical implementation, where generator
//! states occupy mutually distinguishable configurations.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generator::Generator;
use crate::numeric::{round_sig, shannon_entropy_bits};

/// Dissipation below this margin signals an upstream numerical bug, since
/// the information processing second law forbids it.
pub const DISSIPATION_TOL: f64 = 1e-6;

/// Costs of the classical implementation of a generator, in bits and in
/// work units of k_B T ln 2 = 1.
#[derive(Debug, Clone)]
pub struct ClassicalReport {
    /// log2 of the state count.
    pub d_bits: f64,
    /// Shannon entropy of the stationary distribution.
    pub c_bits: f64,
    /// Work per step, `H(S) - H(S', X)`.
    pub work: f64,
    /// Joint distribution P(s', x): rows are end states, columns symbols.
    pub joint: DMatrix<f64>,
}

/// Memory costs: `(D, C) = (log2 |S|, H(pi))`.
pub fn classical_memory(gen: &Generator) -> (f64, f64) {
    let d = (gen.n_states() as f64).log2();
    let c = shannon_entropy_bits(gen.stationary().iter().copied());
    (d, c)
}

/// Joint end-state/symbol distribution `P(s', x) = sum_s pi(s) T^x_{s's}`.
pub fn joint_distribution(gen: &Generator) -> DMatrix<f64> {
    let pi = gen.stationary();
    let mut joint = DMatrix::zeros(gen.n_states(), gen.n_symbols());
    for x in 0..gen.n_symbols() {
        for &(to, from, p) in gen.symbol_transitions(x) {
            joint[(to, x)] += pi[from] * p;
        }
    }
    joint
}

/// Classical work per step in units k_B T ln 2: `W = H(pi) - H(P(s', x))`.
///
/// Non-positive for every generator started from its stationary state; the
/// pattern written to the blank tape can only export entropy.
pub fn classical_work(gen: &Generator) -> f64 {
    let (_, c) = classical_memory(gen);
    c - shannon_entropy_bits(joint_distribution(gen).iter().copied())
}

/// Full classical report.
pub fn classical_report(gen: &Generator) -> ClassicalReport {
    let (d_bits, c_bits) = classical_memory(gen);
    let joint = joint_distribution(gen);
    let work = c_bits - shannon_entropy_bits(joint.iter().copied());
    ClassicalReport { d_bits, c_bits, work, joint }
}

/// Dissipation beyond the information-processing-second-law bound:
/// `W - W_min = W + h_mu`. Zero identifies a thermally efficient
/// implementation; a value below `-1e-6` is reported as an error.
pub fn locality_dissipation(work: f64, h_mu: f64) -> Result<f64> {
    let d = work + h_mu;
    if d < -DISSIPATION_TOL {
        return Err(Error::BoundViolation(d));
    }
    Ok(d)
}

/// Optional conversion of a dimensionless work value (units k_B T ln 2) to
/// joules at temperature `kelvin`.
pub fn work_to_joules(work: f64, kelvin: f64) -> f64 {
    const K_B: f64 = 1.380_649e-23;
    work * K_B * kelvin * std::f64::consts::LN_2
}

/// Flat report serialization: `{D, C, W, dissipation}`, 12 significant
/// digits.
#[derive(Debug, Clone, Serialize)]
pub struct FlatReport {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub dissipation: f64,
}

impl FlatReport {
    pub fn new(d: f64, c: f64, w: f64, dissipation: f64) -> Self {
        FlatReport {
            d: round_sig(d, 12),
            c: round_sig(c, 12),
            w: round_sig(w, 12),
            dissipation: round_sig(dissipation, 12),
        }
    }
}
