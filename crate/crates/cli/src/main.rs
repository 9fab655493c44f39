//! `bellcert`: analyze event-ready CHSH runs, bound their LHV P-values,
//! simulate sources, audit setting bits and check spacelike separation.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bellcert::ErrorKind;

/// Exit code for malformed or empty input data.
pub const EXIT_PARSE: u8 = 3;
/// Exit code for invalid arguments, manifests or configuration.
pub const EXIT_VALIDATION: u8 = 4;
/// Exit code for statistics that cannot be computed from valid data.
pub const EXIT_COMPUTATION: u8 = 5;
/// Exit code for I/O failures.
pub const EXIT_IO: u8 = 6;
/// Exit code when a check ran but did not pass.
pub const EXIT_CHECK_FAILED: u8 = 1;

#[derive(Debug, Parser)]
#[command(name = "bellcert", version, about = "Certification statistics for event-ready CHSH Bell tests")]
struct Cli {
    /// Worker threads for parallel analyses. Overrides BELLCERT_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full certification report for a run.
    Analyze(AnalyzeArgs),
    /// P-value bounds from S, or from a win count.
    Pvalue(PvalueArgs),
    /// Simulate a run, or validate the bounds over many simulated runs.
    Simulate(SimulateArgs),
    /// Audit setting bit streams and the predictability budget.
    Qrng {
        #[command(subcommand)]
        command: QrngCommand,
    },
    /// Spacelike-separation timing checks.
    Spacetime {
        #[command(subcommand)]
        command: SpacetimeCommand,
    },
    /// Setting-independence and no-signaling tests on an event file.
    Nosignal(NosignalArgs),
    /// Write the published reference runs as event files and manifests.
    Fixtures(FixturesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Run manifest (TOML). Without it, --events is required.
    manifest: Option<PathBuf>,
    /// Event file; overrides the manifest.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Event file format: delimited or jsonl. Guessed from the extension.
    #[arg(long)]
    event_format: Option<String>,
    /// Setting predictability τ; overrides the manifest.
    #[arg(long)]
    tau: Option<f64>,
    /// Decimals in text output; overrides the manifest.
    #[arg(long)]
    precision: Option<usize>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PvalueArgs {
    /// Event-based S value for the martingale bound.
    #[arg(long)]
    s: Option<f64>,
    /// Win count for the game bound.
    #[arg(long)]
    wins: Option<u64>,
    /// Number of events.
    #[arg(long, short)]
    n: u64,
    #[arg(long, default_value_t = bellcert::fixtures::REFERENCE_TAU)]
    tau: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Quantum,
    Deterministic,
    OptimalBiased,
    LossReactive,
    HeraldConditioned,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = ModelArg::Quantum)]
    model: ModelArg,
    /// Visibility of the quantum model.
    #[arg(long, default_value_t = 1.0)]
    visibility: f64,
    /// Strategy index 0..16 for the deterministic model.
    #[arg(long, default_value_t = 0)]
    strategy: usize,
    /// Signed bias of setting a: P(a = α) = 1/2 + tau_a.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    tau_a: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    tau_b: f64,
    /// Probability that a herald announces Psi+.
    #[arg(long, default_value_t = 0.5)]
    psi_plus_fraction: f64,
    /// Events per run.
    #[arg(long, short, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Validate the bounds over this many runs instead of writing events.
    #[arg(long)]
    trials: Option<u64>,
    /// Significance level for the validation.
    #[arg(long, default_value_t = 0.01)]
    kappa: f64,
    /// Event output file; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Event file format: delimited or jsonl.
    #[arg(long)]
    event_format: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatArg {
    Bias,
    Scc,
    Window,
    Serial,
    All,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WindowStatArg {
    Bias,
    Scc1,
}

#[derive(Debug, Subcommand)]
enum QrngCommand {
    /// Bias, serial correlation, time evolution and the serial test.
    Audit {
        /// Bit file: packed bytes (LSB first) or ASCII 0/1.
        file: PathBuf,
        /// packed or ascii; `.txt` and `.bits` files default to ascii.
        #[arg(long)]
        bit_format: Option<String>,
        #[arg(long, value_enum, default_value_t = StatArg::All)]
        stat: StatArg,
        /// Smallest lag for SCC.
        #[arg(long, default_value_t = 1)]
        min_lag: usize,
        /// Largest lag for SCC.
        #[arg(long, default_value_t = 8)]
        max_lag: usize,
        /// Window size in bits for the time evolution.
        #[arg(long)]
        window: Option<usize>,
        #[arg(long, value_enum, default_value_t = WindowStatArg::Bias)]
        window_stat: WindowStatArg,
        /// Block length for the serial test.
        #[arg(long, default_value_t = 4)]
        block_length: usize,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// τ₁ and τ₂ from a budget file, or from the reference device.
    Budget {
        /// Budget TOML; the reference device when absent.
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Predictability after XOR-ing several bits.
    Xor {
        #[arg(long)]
        tau: f64,
        #[arg(long)]
        depth: u32,
    },
    /// Write a simulated bit stream.
    Generate {
        #[arg(long, short)]
        n: usize,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        bias: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long)]
        bit_format: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum SpacetimeCommand {
    /// Margins of every scenario; fails if any margin is not positive.
    Check {
        /// Configuration TOML; the reference geometry when absent.
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
}

#[derive(Debug, Args)]
struct NosignalArgs {
    events: PathBuf,
    #[arg(long)]
    event_format: Option<String>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Debug, Args)]
struct FixturesArgs {
    /// Output directory.
    #[arg(long, short, default_value = "fixtures")]
    out: PathBuf,
    /// Only this run id.
    #[arg(long)]
    run: Option<String>,
    /// Event file format: delimited or jsonl.
    #[arg(long, default_value = "delimited")]
    event_format: String,
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var("BELLCERT_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| {
                bellcert::Error::Validation(format!("BELLCERT_THREADS={v:?} is not a thread count"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<bellcert::Error>() {
        return match e.kind() {
            ErrorKind::Parse => EXIT_PARSE,
            ErrorKind::Validation => EXIT_VALIDATION,
            ErrorKind::Computation => EXIT_COMPUTATION,
            ErrorKind::Io => EXIT_IO,
        };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return EXIT_IO;
    }
    EXIT_VALIDATION
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Pvalue(a) => commands::pvalue(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Qrng { command } => commands::qrng(command),
        Command::Spacetime { command } => commands::spacetime(command),
        Command::Nosignal(a) => commands::nosignal(a),
        Command::Fixtures(a) => commands::fixtures(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
