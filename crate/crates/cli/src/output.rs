//! Output formatting shared by the CLI commands: significant-figure
//! rendering, file-or-stdout writing, and the exit-code contract.

use hmmq_core::Error;
use std::io::Write;
use std::path::Path;

/// Exit code for input or validation failures.
pub const EXIT_INPUT: i32 = 1;
/// Exit code for numerical failures.
pub const EXIT_NUMERICAL: i32 = 2;
/// Exit code when the reference-table regression gate fails.
pub const EXIT_REGRESSION: i32 = 3;

/// Maps library errors onto the exit-code contract
/// (0 ok / 1 input / 2 numerical / 3 regression).
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Spec(_)
        | Error::RowSum { .. }
        | Error::Reducibility { .. }
        | Error::Alphabet { .. }
        | Error::NotUnifilar
        | Error::Resource(_)
        | Error::Encoding(_)
        | Error::Domain(_) => EXIT_INPUT,
        Error::BoundViolation(_)
        | Error::Convergence(_)
        | Error::Spectrum(_)
        | Error::Consistency(_)
        | Error::Shape(_)
        | Error::Trace(_)
        | Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

/// Renders `x` with three significant figures for human-readable tables.
/// Magnitudes below 1e-12 are rounding noise at the 12-digit reporting
/// scale and print as 0.
pub fn fmt3(x: f64) -> String {
    if x.abs() < 1e-12 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (2 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Writes `text` to `out` when given, stdout otherwise.
pub fn write_out(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let stdout = std::io::stdout();
            let mut handle = stdout.lock();
            handle.write_all(text.as_bytes())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_significant_figures() {
        assert_eq!(fmt3(0.8112781), "0.811");
        assert_eq!(fmt3(2.7114687), "2.71");
        assert_eq!(fmt3(-0.5), "-0.500");
        assert_eq!(fmt3(-0.6778671), "-0.678");
        assert_eq!(fmt3(0.0), "0");
        assert_eq!(fmt3(123.456), "123");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code_for(&Error::Domain("p".into())), EXIT_INPUT);
        assert_eq!(exit_code_for(&Error::Spectrum(-1.0)), EXIT_NUMERICAL);
    }
}
