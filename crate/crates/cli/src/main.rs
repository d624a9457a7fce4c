//! `tatonnement` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "tatonnement",
    version,
    about = "Simulate and check asynchronous tatonnement in Fisher markets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace as CSV.
    Simulate {
        /// Market file, or the name of a corpus market.
        #[arg(long)]
        market: String,
        /// Scenario file, or the name of a corpus scenario.
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        /// Required for stochastic timing or staleness models.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's step size.
        #[arg(long)]
        lambda: Option<f64>,
        /// Allow step sizes above the safe bound.
        #[arg(long)]
        exploratory: bool,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Solve for a reference equilibrium and write its certificate.
    Equilibrium {
        #[arg(long)]
        market: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every checker on a trace; exits 0 iff all pass.
    Check {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        market: String,
        /// Step size of the run; inferred from the recorded gammas if absent.
        #[arg(long)]
        lambda: Option<f64>,
        /// Per-check CSV report.
        #[arg(long)]
        report: Option<PathBuf>,
        /// JSON summary; printed to standard output if absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run one scenario over a grid of step sizes.
    Sweep {
        #[arg(long, default_value = "ces_comp_2")]
        market: String,
        #[arg(long, default_value = "ces_comp_2__synchronous")]
        scenario: String,
        #[arg(long)]
        lambda_min: f64,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long)]
        steps: usize,
        /// Base seed; each grid point gets its own derived seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the log potential gap of a trace against time.
    Fit {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        market: String,
        #[arg(long)]
        lambda: Option<f64>,
        /// Reference potential; solved for if absent.
        #[arg(long)]
        phi_star: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!();
            eprintln!("{}", Cli::command().render_usage());
            eprintln!("For more information, try '--help'.");
            ExitCode::from(2)
        }
    }
}
