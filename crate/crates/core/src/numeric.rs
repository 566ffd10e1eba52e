//! Shannon-entropy helpers and float formatting utilities.
//!
//! All entropies in this crate are in bits (log base 2), and work costs are
//! reported in units of k_B T ln 2 = 1.

/// Probabilities below this are treated as exact zeros inside entropy sums.
pub const ENTROPY_CLAMP: f64 = 1e-15;

/// `p * log2(p)` with the continuity convention `0 log 0 = 0`.
#[inline]
pub fn xlg(p: f64) -> f64 {
    if p <= ENTROPY_CLAMP {
        0.0
    } else {
        p * p.log2()
    }
}

/// Shannon entropy in bits of a (sub)distribution given by `ps`.
///
/// The input need not be normalized; entries below [`ENTROPY_CLAMP`] are
/// skipped.
pub fn shannon_entropy_bits<I>(ps: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    -ps.into_iter().map(xlg).sum::<f64>()
}

/// Binary entropy h(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    -xlg(p) - xlg(1.0 - p)
}

/// Rounds `x` to `digits` significant decimal digits.
///
/// Used when serializing reports; the rounded value is then written as an
/// ordinary decimal double.
pub fn round_sig(x: f64, digits: i32) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(digits - 1 - magnitude);
    (x * factor).round() / factor
}
