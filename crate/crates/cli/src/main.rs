//! `polyrep` command-line tool.

mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const INPUT: u8 = 1;
    pub const NOT_ADMISSIBLE: u8 = 2;
    pub const OTHER: u8 = 3;
    pub const CERTIFICATE: u8 = 4;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "polyrep", version, about = "Dissipative polymatrix replicators: classification, reduction, collapse and simulation")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Semidefiniteness tolerance.
    #[arg(long, default_value_t = 1e-9, value_parser = positive, allow_hyphen_values = true, global = true)]
    pub tol: f64,
    /// Seed for randomised searches and random initial states.
    #[arg(long, env = "POLYREP_SEED", default_value_t = 0, global = true)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dissipativity, equilibria and admissibility of a game.
    Check { game: PathBuf },
    /// Vertex matrices, their graphs and stable dissipativity.
    Vertices { game: PathBuf },
    /// Colour propagation to the reduced information set.
    Reduce { game: PathBuf },
    /// Iterated reduction to a conservative game.
    Collapse {
        game: PathBuf,
        /// Write the final game to this file.
        #[arg(long)]
        emit_game: Option<PathBuf>,
    },
    /// Integrate the replicator equation.
    Simulate(SimulateArgs),
    /// Formal and interior equilibria.
    Equilibrium { game: PathBuf },
    /// Compactify a Lotka-Volterra system into a one-group game.
    Lv2rep {
        /// Interaction matrix file, one row per line.
        #[arg(long = "A", value_name = "FILE")]
        a: PathBuf,
        /// Intrinsic rates, comma separated.
        #[arg(long = "r", value_name = "LIST", allow_hyphen_values = true)]
        r: String,
        #[arg(long)]
        emit_game: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub game: PathBuf,
    /// Comma-separated state, `random` or `random:SEED`.
    #[arg(long, default_value = "random")]
    pub x0: String,
    /// Duration.
    #[arg(long = "T", default_value_t = 100.0, value_parser = positive)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01, value_parser = positive)]
    pub dt: f64,
    /// Comma-separated subset of `h`, `gb`, `ratios` or `ratio:I/J`.
    #[arg(long, default_value = "")]
    pub monitors: String,
    /// Write the trajectory here instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// Runs one command, writing reports to `out`; returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> u8 {
    match commands::dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            commands::exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::INPUT } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let code = run(&cli, &mut lock);
    let _ = lock.flush();
    ExitCode::from(code)
}
