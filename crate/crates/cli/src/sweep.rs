//! Parameter sweeps over the SNS family, emitting plot-ready CSV.

use hmmq_core::classical;
use hmmq_core::renewal::{self, RenewalFamily};
use hmmq_core::{Error, Result};

use crate::table::{sns_a_costs, sns_b_costs};

/// One sweep point. Quantum costs of generator C coincide with the
/// classical ones (no compression advantage for retrodictive generators),
/// so only the classical C columns are emitted.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub p: f64,
    pub c_c_a: f64,
    pub c_q_a: f64,
    pub c_c_b: f64,
    pub c_q_b: f64,
    pub c_c_c: f64,
    pub w_c_a: f64,
    pub w_q_a: f64,
    pub w_c_b: f64,
    pub w_q_b: f64,
    pub w_c_c: f64,
    pub h_mu: f64,
}

pub const CSV_HEADER: &str = "p,C_cA,C_qA,C_cB,C_qB,C_cC,W_cA,W_qA,W_cB,W_qB,W_cC,h_mu";

/// Evaluates one sweep point at parameter `p`.
pub fn sweep_point(p: f64, truncation: Option<usize>) -> Result<SweepRow> {
    let fam = match truncation {
        Some(n) => RenewalFamily::sns_with_truncation(p, n)?,
        None => RenewalFamily::sns(p)?,
    };
    let (c_c_a, c_q_a, w_c_a, w_q_a) = sns_a_costs(p)?;
    let (c_c_b, c_q_b, w_c_b, w_q_b, h_mu) = sns_b_costs(&fam)?;
    let gen_c = renewal::sns_c_spec(&fam).validate()?;
    let (_, c_c_c) = classical::classical_memory(&gen_c);
    let w_c_c = classical::classical_work(&gen_c);
    Ok(SweepRow { p, c_c_a, c_q_a, c_c_b, c_q_b, c_c_c, w_c_a, w_q_a, w_c_b, w_q_b, w_c_c, h_mu })
}

/// Uniform grid from `p_min` to `p_max` in steps of `step`, inclusive of
/// the endpoint within rounding.
pub fn grid(p_min: f64, p_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(p_min > 0.0 && p_max < 1.0 && p_min <= p_max) {
        return Err(Error::Domain(format!(
            "sweep range [{p_min}, {p_max}] outside (0, 1)"
        )));
    }
    if step <= 0.0 {
        return Err(Error::Domain(format!("step {step} must be positive")));
    }
    let mut ps = Vec::new();
    let mut k = 0usize;
    loop {
        let p = p_min + step * k as f64;
        if p > p_max + 1e-12 {
            break;
        }
        ps.push(p);
        k += 1;
    }
    Ok(ps)
}

/// Runs the sweep; rows come out ordered by p.
pub fn sweep(ps: &[f64], truncation: Option<usize>) -> Result<Vec<SweepRow>> {
    let mut rows: Vec<SweepRow> = ps
        .iter()
        .map(|&p| sweep_point(p, truncation))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.p.partial_cmp(&b.p).unwrap());
    Ok(rows)
}

pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.p,
            fmt12(r.c_c_a),
            fmt12(r.c_q_a),
            fmt12(r.c_c_b),
            fmt12(r.c_q_b),
            fmt12(r.c_c_c),
            fmt12(r.w_c_a),
            fmt12(r.w_q_a),
            fmt12(r.w_c_b),
            fmt12(r.w_q_b),
            fmt12(r.w_c_c),
            fmt12(r.h_mu),
        ));
    }
    s
}

fn fmt12(x: f64) -> String {
    format!("{}", hmmq_core::numeric::round_sig(x, 12))
}
