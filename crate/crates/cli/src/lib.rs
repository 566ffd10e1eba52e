//! Command-line workbench over `hmmq-core`: load or build generators, run
//! classical-vs-quantum cost analyses, reproduce the SNS reference table,
//! sweep the SNS parameter, and cross-validate the quantum channel.

pub mod analysis;
pub mod output;
pub mod sweep;
pub mod table;
pub mod verify;

pub use analysis::{analyze_generator, AnalysisBundle, AnalysisOptions, EncodingChoice};
pub use output::{exit_code_for, EXIT_INPUT, EXIT_NUMERICAL, EXIT_REGRESSION};
pub use sweep::{sweep as run_sweep, SweepRow};
pub use table::{table1, TableReport};
pub use verify::{verify, VerifyReport};
