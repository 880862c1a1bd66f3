use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use extremal_ode::cli::{self, CommandKind, Overrides};

#[derive(Parser)]
#[command(
    name = "extremal-ode",
    version,
    about = "Extremal solutions and path-by-path uniqueness certificates for noise-perturbed ODEs"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Override the noise seed (and ensemble seed base).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the grid resolution (number of steps).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Output directory (default: scenario [output].dir, then $EXTREMAL_ODE_OUT, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also emit SVG plots.
    #[arg(long, global = true)]
    svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the equation once (minimal solution) and emit t,y,x CSV.
    Solve {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Compute the minimal and maximal solutions and their gap.
    Extremal {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Evaluate the selected uniqueness certificates.
    Certify {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run a seeded Monte Carlo gap ensemble.
    Ensemble {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run a built-in reproduction case with pinned expectations.
    Reproduce { case: String },
    /// Build and cache the polynomial approximant family for the drift.
    ApproxCache {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides {
        seed: args.seed,
        grid: args.grid,
        out: args.out,
        svg: args.svg,
    };
    let outcome = match &args.command {
        Command::Solve { scenario } => {
            cli::run_scenario_command(CommandKind::Solve, scenario, &overrides)
        }
        Command::Extremal { scenario } => {
            cli::run_scenario_command(CommandKind::Extremal, scenario, &overrides)
        }
        Command::Certify { scenario } => {
            cli::run_scenario_command(CommandKind::Certify, scenario, &overrides)
        }
        Command::Ensemble { scenario } => {
            cli::run_scenario_command(CommandKind::Ensemble, scenario, &overrides)
        }
        Command::Reproduce { case } => cli::cmd_reproduce(case, &overrides),
        Command::ApproxCache { scenario } => {
            cli::run_scenario_command(CommandKind::ApproxCache, scenario, &overrides)
        }
    };
    match outcome {
        Ok(artifacts) => {
            for path in artifacts {
                println!("wrote {}", path.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
