//! Command-line surface: signal discovery, selector fitting, curriculum
//! runs, and emission of figure/table data from a run's event log.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Stable exit codes: 0 success, 2 input error, 3 backend error,
/// 4 fit degeneracy, 5 pool/config violation.
#[derive(Debug)]
pub enum CliError {
    Input(String),
    Backend(String),
    Fit(String),
    Config(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Backend(_) => 3,
            CliError::Fit(_) => 4,
            CliError::Config(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m)
            | CliError::Backend(m)
            | CliError::Fit(m)
            | CliError::Config(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "autocur",
    version,
    about = "Autonomous curriculum runner for one-shot RL from verifiable rewards"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure per-candidate signals from rollouts and write CSV + JSON.
    Signals {
        /// Problems file (JSON Lines); rollouts come from the backend.
        #[arg(long)]
        problems: Option<PathBuf>,
        /// Pre-recorded transcripts (JSON Lines with a responses array);
        /// signals are computed offline, no backend needed.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        /// Backend: `sim` or `remote:<base-url>`.
        #[arg(long, default_value = "sim")]
        backend: String,
        /// Rollouts per candidate.
        #[arg(long, default_value_t = 8)]
        k: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output directory for signals.csv and signals.json.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Fit the linear selector from transfer records and write selector.json.
    Fit {
        /// Transfer records file (JSON Lines: p_s, var_r, disagreement,
        /// level, a_down).
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Execute a full curriculum run into a run directory.
    Run {
        /// Run configuration (JSON). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Dataset (JSON Lines). A deterministic synthetic dataset sized to
        /// the config is generated when omitted.
        #[arg(long)]
        problems: Option<PathBuf>,
        /// Backend: `sim` or `remote:<base-url>`.
        #[arg(long)]
        backend: Option<String>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Run directory (default `runs/<run-id>`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Rollouts per candidate override.
        #[arg(long)]
        k: Option<usize>,
        /// Sieve batch size override.
        #[arg(long)]
        batch: Option<usize>,
        /// Total curriculum steps override.
        #[arg(long)]
        steps: Option<usize>,
        /// Evaluation cadence override.
        #[arg(long)]
        eval_every: Option<usize>,
    },
    /// Emit figure and table data files from a run directory.
    Report {
        /// Run directory containing events.jsonl.
        #[arg(long)]
        run: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Signals {
            problems,
            transcripts,
            backend,
            k,
            seed,
            out,
        } => commands::cmd_signals(problems, transcripts, &backend, k, seed, &out),
        Command::Fit { records, out } => commands::cmd_fit(&records, &out),
        Command::Run {
            config,
            problems,
            backend,
            seed,
            out,
            k,
            batch,
            steps,
            eval_every,
        } => commands::cmd_run(commands::RunArgs {
            config,
            problems,
            backend,
            seed,
            out,
            k,
            batch,
            steps,
            eval_every,
        }),
        Command::Report { run } => report::cmd_report(&run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
