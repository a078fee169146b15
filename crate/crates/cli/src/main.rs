use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use qndsim_cli::artifacts::write_thresholds_csv;
use qndsim_cli::runner::{engine_name, execute, parse_scenario, CliError};
use qndsim_cli::scenario::LambdaGrid;

#[derive(Parser)]
#[command(
    name = "qndsim",
    version,
    about = "Simulate broadcasting a weak oscillator nonlinearity through pulsed QND gates"
)]
struct Cli {
    /// Override the scenario's RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and write its artifacts.
    Run {
        /// Path to a scenario JSON file.
        scenario: PathBuf,
    },
    /// Parse and bound-check a scenario file without running it.
    Validate {
        /// Path to a scenario JSON file.
        scenario: PathBuf,
    },
    /// Print the certification thresholds σ_NC, σ_NG, σ_SQ as CSV.
    Thresholds {
        #[arg(long, default_value_t = 0.0)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1.2)]
        lambda_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario } => {
            let text = fs::read_to_string(&scenario)
                .map_err(|e| CliError::Io(format!("{}: {e}", scenario.display())))?;
            let parsed = parse_scenario(&text)?;
            let outcome = execute(&parsed, cli.seed)?;
            println!(
                "wrote {} artifacts to {}",
                outcome.artifacts.len(),
                outcome.dir.display()
            );
            Ok(())
        }
        Command::Validate { scenario } => {
            let text = fs::read_to_string(&scenario)
                .map_err(|e| CliError::Io(format!("{}: {e}", scenario.display())))?;
            let parsed = parse_scenario(&text)?;
            println!(
                "{}: valid {} scenario with a {} analysis",
                scenario.display(),
                engine_name(parsed.engine),
                parsed.analysis.kind_name()
            );
            Ok(())
        }
        Command::Thresholds { lambda_min, lambda_max, points } => {
            if !(lambda_min.is_finite() && lambda_max.is_finite() && lambda_min < lambda_max) {
                return Err(CliError::Validation(
                    "thresholds: need finite --lambda-min < --lambda-max".to_owned(),
                ));
            }
            if points < 2 {
                return Err(CliError::Validation(
                    "thresholds: --points must be at least 2".to_owned(),
                ));
            }
            let grid = LambdaGrid { min: lambda_min, max: lambda_max, points };
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write_thresholds_csv(&mut w, &grid.values())?;
            w.flush()?;
            Ok(())
        }
    }
}
