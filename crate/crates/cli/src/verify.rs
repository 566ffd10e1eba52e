//! Cross-validation of the quantum channel against exact word
//! probabilities and against sampled trajectories.

use hmmq_core::generator::{Generator, DEFAULT_WORD_BUDGET};
use hmmq_core::numeric::round_sig;
use hmmq_core::quantum::{
    build_isometry, embed_states, sample_trajectory, solve_overlaps, stationary_memory_state,
    EncodingScheme,
};
use hmmq_core::Result;
use std::collections::HashMap;

use crate::output::fmt3;

/// Statistical comparison for one word: exact probability, empirical
/// frequency over the sampled trajectory, and an approximate three-sigma
/// binomial half-width (windows overlap, so this is indicative rather
/// than exact).
#[derive(Debug, Clone)]
pub struct WordStat {
    pub word: String,
    pub exact: f64,
    pub empirical: f64,
    pub ci_half_width: f64,
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub id: String,
    pub l_max: usize,
    pub samples: usize,
    pub seed: u64,
    /// Largest deviation between channel-iterated and exact word
    /// probabilities over all words of length <= l_max.
    pub exact_max_deviation: f64,
    pub word_stats: Vec<WordStat>,
    /// Largest |empirical - exact| in units of the CI half-width.
    pub max_ci_ratio: f64,
}

/// Builds the channel for `gen`, iterates it `l_max` steps comparing
/// against the exact word distribution, then samples one seeded trajectory
/// of length `samples` and compares empirical frequencies for words of
/// length one and two.
pub fn verify(gen: &Generator, l_max: usize, samples: usize, seed: u64) -> Result<VerifyReport> {
    let enc = EncodingScheme::EndStateLabel;
    let gram = solve_overlaps(gen, &enc)?;
    let emb = embed_states(&gram)?;
    let iso = build_isometry(gen, &emb, &enc)?;
    let rho = stationary_memory_state(gen, &emb);

    let mut exact_max_deviation = 0.0f64;
    for l in 0..=l_max {
        let channel: HashMap<Vec<usize>, f64> =
            iso.word_distribution(&rho, l).into_iter().collect();
        let exact = gen.word_distribution(l, DEFAULT_WORD_BUDGET)?;
        let mut covered = 0.0;
        for (w, p) in &exact {
            let pc = channel.get(w).copied().unwrap_or(0.0);
            exact_max_deviation = exact_max_deviation.max((pc - p).abs());
            covered += pc;
        }
        // mass the channel assigns outside the exact support
        let total: f64 = channel.values().sum();
        exact_max_deviation = exact_max_deviation.max((total - covered).abs());
    }

    let trajectory = sample_trajectory(gen, samples, seed);
    let mut word_stats = Vec::new();
    let mut max_ci_ratio = 0.0f64;
    for l in 1..=2usize.min(samples.max(1)) {
        if samples < l {
            break;
        }
        let mut counts: HashMap<&[usize], usize> = HashMap::new();
        for window in trajectory.0.windows(l) {
            *counts.entry(window).or_insert(0) += 1;
        }
        let n_windows = (samples + 1 - l) as f64;
        for (w, p) in gen.word_distribution(l, DEFAULT_WORD_BUDGET)? {
            let empirical = counts.get(w.as_slice()).copied().unwrap_or(0) as f64 / n_windows;
            let ci = 3.0 * (p * (1.0 - p) / n_windows).sqrt();
            if ci > 0.0 {
                max_ci_ratio = max_ci_ratio.max((empirical - p).abs() / ci);
            }
            let label: Vec<&str> = w.iter().map(|&x| gen.symbol_label(x)).collect();
            word_stats.push(WordStat {
                word: label.join(""),
                exact: p,
                empirical,
                ci_half_width: ci,
            });
        }
    }

    Ok(VerifyReport {
        id: String::new(),
        l_max,
        samples,
        seed,
        exact_max_deviation,
        word_stats,
        max_ci_ratio,
    })
}

impl VerifyReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "id": self.id,
            "l_max": self.l_max,
            "samples": self.samples,
            "seed": self.seed,
            "exact_max_deviation": round_sig(self.exact_max_deviation, 12),
            "words": self.word_stats.iter().map(|w| serde_json::json!({
                "word": w.word,
                "exact": round_sig(w.exact, 12),
                "empirical": round_sig(w.empirical, 12),
                "ci_half_width": round_sig(w.ci_half_width, 12),
            })).collect::<Vec<_>>(),
            "max_ci_ratio": round_sig(self.max_ci_ratio, 12),
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "channel vs exact word probabilities (L <= {}): max deviation {:.3e}\n",
            self.l_max, self.exact_max_deviation
        );
        s.push_str(&format!(
            "trajectory: {} steps, seed {}\n{:<8} {:>10} {:>10} {:>10}\n",
            self.samples, self.seed, "word", "exact", "empirical", "3-sigma"
        ));
        for w in &self.word_stats {
            s.push_str(&format!(
                "{:<8} {:>10} {:>10} {:>10}\n",
                w.word,
                fmt3(w.exact),
                fmt3(w.empirical),
                fmt3(w.ci_half_width)
            ));
        }
        s.push_str(&format!("max |empirical - exact| / CI: {}\n", fmt3(self.max_ci_ratio)));
        s
    }
}
