//! Full classical-vs-quantum analysis of a single generator, bundled with
//! the empirical theorem checks.

use serde::Serialize;

use hmmq_core::classical;
use hmmq_core::generator::{Generator, GeneratorSpec, DEFAULT_WORD_BUDGET};
use hmmq_core::numeric::round_sig;
use hmmq_core::quantum::{self, EncodingScheme};
use hmmq_core::{Error, Result};

use crate::output::fmt3;

/// Strict-advantage threshold for the memory-compression theorem check.
pub const ADVANTAGE_TOL: f64 = 1e-6;
/// Equality band for retrodictive generators.
pub const EQUALITY_TOL: f64 = 1e-9;
/// Sign-agreement zero band for the memory/work equivalence check.
pub const SIGN_BAND: f64 = 1e-6;
/// One-sided slack on the second-law checks; the block-entropy estimate
/// converges from above so only numerical noise can push below zero.
pub const IPSL_SLACK: f64 = 0.02;

/// Which auxiliary encoding the analysis uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingChoice {
    /// End-state label (default; valid for every generator).
    EndState,
    /// Zero-phase one-dimensional encoding (unifilar generators only).
    Phase,
}

impl EncodingChoice {
    pub fn scheme(&self, gen: &Generator) -> EncodingScheme {
        match self {
            EncodingChoice::EndState => EncodingScheme::EndStateLabel,
            EncodingChoice::Phase => EncodingScheme::zero_phases(gen),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            EncodingChoice::EndState => "end-state",
            EncodingChoice::Phase => "phase",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub encoding: EncodingChoice,
    /// Block length for the entropy-rate estimate.
    pub l_max: usize,
    pub id: String,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { encoding: EncodingChoice::EndState, l_max: 10, id: "generator".into() }
    }
}

/// Per-implementation cost summary.
#[derive(Debug, Clone, Serialize)]
pub struct CostSummary {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "W")]
    pub w: f64,
    pub dissipation: f64,
}

/// Outcome of the empirical theorem checks, computed from the numbers in
/// this bundle only.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremChecks {
    /// Strict memory advantage iff non-retrodictive.
    pub t1_advantage_iff_nonretrodictive: bool,
    /// sign(C_c - C_q) agrees with sign(W_c - W_q).
    pub t2_memory_work_sign_agreement: bool,
    /// W + h >= -slack for the classical implementation.
    pub ipsl_classical: bool,
    /// W + h >= -slack for the quantum implementation.
    pub ipsl_quantum: bool,
}

impl TheoremChecks {
    pub fn all_pass(&self) -> bool {
        self.t1_advantage_iff_nonretrodictive
            && self.t2_memory_work_sign_agreement
            && self.ipsl_classical
            && self.ipsl_quantum
    }
}

/// Everything the analyze command reports for one generator.
#[derive(Debug, Clone)]
pub struct AnalysisBundle {
    pub id: String,
    pub encoding: EncodingChoice,
    pub states_before_merge: usize,
    pub n_states: usize,
    pub n_symbols: usize,
    pub unifilar: bool,
    pub retrodictive: bool,
    pub classical: classical::ClassicalReport,
    pub quantum: quantum::QuantumReport,
    /// Block-entropy estimate of the entropy rate at `l_max_used`.
    pub h_mu_estimate: f64,
    pub l_max_used: usize,
    /// Exact entropy rate when the generator is unifilar.
    pub h_mu_unifilar: Option<f64>,
    pub checks: TheoremChecks,
}

impl AnalysisBundle {
    /// The entropy rate used for dissipation figures: exact when available,
    /// the block estimate otherwise.
    pub fn h_for_dissipation(&self) -> f64 {
        self.h_mu_unifilar.unwrap_or(self.h_mu_estimate)
    }

    pub fn classical_summary(&self) -> CostSummary {
        let h = self.h_for_dissipation();
        CostSummary {
            d: self.classical.d_bits,
            c: self.classical.c_bits,
            w: self.classical.work,
            dissipation: self.classical.work + h,
        }
    }

    pub fn quantum_summary(&self) -> CostSummary {
        let h = self.h_for_dissipation();
        CostSummary {
            d: self.quantum.d_bits,
            c: self.quantum.c_bits,
            w: self.quantum.work,
            dissipation: self.quantum.work + h,
        }
    }

    /// JSON bundle with floats rounded to 12 significant digits.
    pub fn to_json(&self) -> serde_json::Value {
        let cs = self.classical_summary();
        let qs = self.quantum_summary();
        serde_json::json!({
            "id": self.id,
            "encoding": self.encoding.label(),
            "states_before_merge": self.states_before_merge,
            "states": self.n_states,
            "symbols": self.n_symbols,
            "unifilar": self.unifilar,
            "retrodictive": self.retrodictive,
            "classical": {
                "D": round_sig(cs.d, 12),
                "C": round_sig(cs.c, 12),
                "W": round_sig(cs.w, 12),
                "dissipation": round_sig(cs.dissipation, 12),
            },
            "quantum": self.quantum.to_json(),
            "quantum_dissipation": round_sig(qs.dissipation, 12),
            "h_mu_estimate": round_sig(self.h_mu_estimate, 12),
            "h_mu_estimate_block_length": self.l_max_used,
            "h_mu_unifilar": self.h_mu_unifilar.map(|h| round_sig(h, 12)),
            "checks": {
                "t1_advantage_iff_nonretrodictive": self.checks.t1_advantage_iff_nonretrodictive,
                "t2_memory_work_sign_agreement": self.checks.t2_memory_work_sign_agreement,
                "ipsl_classical": self.checks.ipsl_classical,
                "ipsl_quantum": self.checks.ipsl_quantum,
            },
        })
    }

    /// Human-readable table, three significant figures.
    pub fn to_text(&self) -> String {
        let cs = self.classical_summary();
        let qs = self.quantum_summary();
        let mut s = String::new();
        s.push_str(&format!(
            "generator: {}  states: {} (before merge: {})  symbols: {}\n",
            self.id, self.n_states, self.states_before_merge, self.n_symbols
        ));
        s.push_str(&format!(
            "flags: unifilar={} retrodictive={}  encoding: {}\n",
            self.unifilar,
            self.retrodictive,
            self.encoding.label()
        ));
        s.push_str(&format!(
            "{:<10} {:>8} {:>8} {:>8} {:>12}\n",
            "", "D", "C", "W", "dissipation"
        ));
        for (name, r) in [("classical", &cs), ("quantum", &qs)] {
            s.push_str(&format!(
                "{:<10} {:>8} {:>8} {:>8} {:>12}\n",
                name,
                fmt3(r.d),
                fmt3(r.c),
                fmt3(r.w),
                fmt3(r.dissipation)
            ));
        }
        s.push_str(&format!(
            "h_mu estimate (L={}): {}",
            self.l_max_used,
            fmt3(self.h_mu_estimate)
        ));
        if let Some(h) = self.h_mu_unifilar {
            s.push_str(&format!("   exact (unifilar): {}", fmt3(h)));
        }
        s.push('\n');
        s.push_str(&format!(
            "checks: T1 {}  T2 {}  IPSL(c) {}  IPSL(q) {}\n",
            ok(self.checks.t1_advantage_iff_nonretrodictive),
            ok(self.checks.t2_memory_work_sign_agreement),
            ok(self.checks.ipsl_classical),
            ok(self.checks.ipsl_quantum)
        ));
        s
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

/// Largest block length whose word tree fits the enumeration budget.
fn feasible_block_length(n_symbols: usize, requested: usize) -> usize {
    let mut l = 1usize;
    let mut level = n_symbols;
    let mut nodes = 1usize + n_symbols;
    while l < requested {
        match level.checked_mul(n_symbols) {
            Some(next) if nodes + next <= DEFAULT_WORD_BUDGET => {
                level = next;
                nodes += next;
                l += 1;
            }
            _ => break,
        }
    }
    l
}

/// Runs the full pipeline on an already-validated generator:
/// classify, merge redundant states, classical costs, quantum construction
/// and costs, entropy-rate figures, and the theorem checks.
pub fn analyze_generator(gen: &Generator, opts: &AnalysisOptions) -> Result<AnalysisBundle> {
    let states_before_merge = gen.n_states();
    let merged = gen.merge_equivalent_states();

    let classical_report = classical::classical_report(&merged);
    let scheme = opts.encoding.scheme(&merged);
    let quantum_report = quantum::quantum_report(&merged, &scheme)?;

    let l_max_used = feasible_block_length(merged.n_symbols(), opts.l_max.clamp(1, 16));
    let h_mu_estimate = merged.entropy_rate_estimate(l_max_used, DEFAULT_WORD_BUDGET)?;
    let h_mu_unifilar =
        if merged.is_unifilar() { Some(merged.entropy_rate_unifilar()?) } else { None };

    let dc = classical_report.c_bits - quantum_report.c_bits;
    let dw = classical_report.work - quantum_report.work;
    let retrodictive = merged.is_retrodictive();
    let t1 = if retrodictive { dc.abs() <= EQUALITY_TOL } else { dc > ADVANTAGE_TOL };
    let sign = |v: f64| {
        if v > SIGN_BAND {
            1
        } else if v < -SIGN_BAND {
            -1
        } else {
            0
        }
    };
    // Generators whose overlap clusters are symbol-uniform have exactly
    // equal work costs despite strict memory compression; the sign
    // equivalence applies outside that degenerate family.
    let t2 = if merged.has_symbol_uniform_overlap_clusters() {
        dw.abs() <= SIGN_BAND
    } else {
        sign(dc) == sign(dw)
    };
    let ipsl_c = classical_report.work + h_mu_estimate >= -IPSL_SLACK;
    let ipsl_q = quantum_report.work + h_mu_estimate >= -IPSL_SLACK;

    Ok(AnalysisBundle {
        id: opts.id.clone(),
        encoding: opts.encoding,
        states_before_merge,
        n_states: merged.n_states(),
        n_symbols: merged.n_symbols(),
        unifilar: merged.is_unifilar(),
        retrodictive,
        classical: classical_report,
        quantum: quantum_report,
        h_mu_estimate,
        l_max_used,
        h_mu_unifilar,
        checks: TheoremChecks {
            t1_advantage_iff_nonretrodictive: t1,
            t2_memory_work_sign_agreement: t2,
            ipsl_classical: ipsl_c,
            ipsl_quantum: ipsl_q,
        },
    })
}

/// Parses, validates, and analyzes a JSON generator spec.
pub fn analyze_spec_text(text: &str, opts: &AnalysisOptions) -> Result<AnalysisBundle> {
    let spec = GeneratorSpec::from_json(text)?;
    let gen = spec.validate()?;
    analyze_generator(&gen, opts)
}

/// Loads a spec file, enforcing the `HMMQ_MAX_STATES` bound on accepted
/// state counts.
pub fn load_spec_file(path: &std::path::Path) -> Result<Generator> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
    let spec = GeneratorSpec::from_json(&text)
        .map_err(|e| Error::Spec(format!("{}: {e}", path.display())))?;
    let max_states = max_states_bound();
    if spec.states.len() > max_states {
        return Err(Error::Resource(format!(
            "{}: {} states exceeds HMMQ_MAX_STATES = {max_states}",
            path.display(),
            spec.states.len()
        )));
    }
    spec.validate()
}

/// State-count bound for externally supplied generators
/// (`HMMQ_MAX_STATES`, default 2000).
pub fn max_states_bound() -> usize {
    std::env::var("HMMQ_MAX_STATES")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(2000)
}
