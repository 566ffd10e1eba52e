use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use hmmq_cli::analysis::{self, AnalysisOptions, EncodingChoice};
use hmmq_cli::output::{exit_code_for, write_out, EXIT_INPUT, EXIT_REGRESSION};
use hmmq_cli::{sweep, table, verify};
use hmmq_core::renewal::{self, RenewalFamily};

/// Workbench for classical and quantum implementations of hidden Markov
/// generators: memory costs, work costs, and the theorems tying them
/// together.
#[derive(Parser)]
#[command(name = "hmmq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodingArg {
    /// End-state label auxiliary encoding (any generator).
    EndState,
    /// Zero-phase encoding (unifilar generators only).
    Phase,
}

impl From<EncodingArg> for EncodingChoice {
    fn from(e: EncodingArg) -> Self {
        match e {
            EncodingArg::EndState => EncodingChoice::EndState,
            EncodingArg::Phase => EncodingChoice::Phase,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum SnsKind {
    A,
    B,
    C,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze a generator spec: validate, classify, merge, and compute
    /// classical and quantum memory/work costs with theorem checks.
    Analyze(AnalyzeArgs),
    /// Rebuild the SNS cost table; exits with code 3 if any p = 1/2 entry
    /// deviates from the reference values by more than 0.005.
    Table1(Table1Args),
    /// Sweep the SNS parameter p and emit one CSV row per point.
    Sweep(SweepArgs),
    /// Cross-validate the quantum channel against exact word probabilities
    /// and a sampled trajectory.
    Verify(VerifyArgs),
    /// Emit an SNS generator spec as JSON.
    Sns(SnsArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Generator spec file (JSON).
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "end-state")]
    encoding: EncodingArg,
    /// Block length for the entropy-rate estimate.
    #[arg(long = "L-max", default_value_t = 10)]
    l_max: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Table1Args {
    /// SNS parameter.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Truncation override for generators B and C.
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long = "p-min", default_value_t = 0.1)]
    p_min: f64,
    #[arg(long = "p-max", default_value_t = 0.95)]
    p_max: f64,
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Truncation override for generators B and C.
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Longest word length for the exact channel comparison.
    #[arg(long = "L-max", default_value_t = 6)]
    l_max: usize,
    /// Trajectory length for the statistical comparison.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SnsArgs {
    #[arg(long, value_enum)]
    generator: SnsKind,
    #[arg(long)]
    p: f64,
    /// Truncation for generators B and C (auto-selected when omitted).
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err((code, msg)) => {
            eprintln!("hmmq: {msg}");
            ExitCode::from(code as u8)
        }
    }
}

type CmdResult = Result<ExitCode, (i32, String)>;

fn lib_err(e: hmmq_core::Error) -> (i32, String) {
    (exit_code_for(&e), e.to_string())
}

fn io_err(e: std::io::Error) -> (i32, String) {
    (EXIT_INPUT, e.to_string())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Analyze(args) => {
            let gen = analysis::load_spec_file(&args.spec).map_err(lib_err)?;
            let opts = AnalysisOptions {
                encoding: args.encoding.into(),
                l_max: args.l_max,
                id: args.spec.display().to_string(),
            };
            let bundle = analysis::analyze_generator(&gen, &opts).map_err(lib_err)?;
            let text = match args.format {
                Format::Text => bundle.to_text(),
                Format::Json => format!("{:#}\n", bundle.to_json()),
            };
            write_out(args.out.as_deref(), &text).map_err(io_err)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Table1(args) => {
            let report = table::table1(args.p, args.n).map_err(lib_err)?;
            let text = match args.format {
                Format::Text => report.to_text(),
                Format::Json => format!("{:#}\n", report.to_json()),
            };
            write_out(args.out.as_deref(), &text).map_err(io_err)?;
            if report.regression_failures.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_REGRESSION as u8))
            }
        }
        Command::Sweep(args) => {
            let ps = sweep::grid(args.p_min, args.p_max, args.step).map_err(lib_err)?;
            let rows = sweep::sweep(&ps, args.n).map_err(lib_err)?;
            write_out(args.out.as_deref(), &sweep::to_csv(&rows)).map_err(io_err)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let gen = analysis::load_spec_file(&args.spec).map_err(lib_err)?;
            let mut report =
                verify::verify(&gen, args.l_max, args.samples, args.seed).map_err(lib_err)?;
            report.id = args.spec.display().to_string();
            let text = match args.format {
                Format::Text => report.to_text(),
                Format::Json => format!("{:#}\n", report.to_json()),
            };
            write_out(args.out.as_deref(), &text).map_err(io_err)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sns(args) => {
            let spec = match args.generator {
                SnsKind::A => {
                    renewal::build_sns_a(args.p).map_err(lib_err)?;
                    renewal::sns_a_spec(args.p)
                }
                SnsKind::B | SnsKind::C => {
                    let fam = match args.n {
                        Some(n) => RenewalFamily::sns_with_truncation(args.p, n),
                        None => RenewalFamily::sns(args.p),
                    }
                    .map_err(lib_err)?;
                    let max = analysis::max_states_bound();
                    if fam.truncation() + 1 > max {
                        return Err((
                            EXIT_INPUT,
                            format!(
                                "truncation {} exceeds HMMQ_MAX_STATES = {max}",
                                fam.truncation() + 1
                            ),
                        ));
                    }
                    match args.generator {
                        SnsKind::B => renewal::sns_b_spec(&fam),
                        _ => renewal::sns_c_spec(&fam),
                    }
                }
            };
            let mut text = spec.to_json();
            text.push('\n');
            write_out(args.out.as_deref(), &text).map_err(io_err)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}
