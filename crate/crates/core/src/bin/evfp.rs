use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use evfp::harness::{self, config::parse_config};

#[derive(Parser)]
#[command(name = "evfp", version, about = "Homogeneous Einstein–Vlasov–Fokker–Planck cosmology")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration; writes timeseries.csv and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the closed-form regime verdict of the initial data as JSON.
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Classify every (phi0, sigma) cell of the [sweep] ranges; writes sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Also simulate every cell.
        #[arg(long)]
        resolve: bool,
        /// Worker threads, 0 for one per core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Fit blow-up time and singular exponents to a timeseries CSV.
    FitBlowup { timeseries: PathBuf },
}

fn load(path: &PathBuf) -> Result<harness::config::RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_config(&text)?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = load(&config)?;
            let out = harness::cmd_simulate(&cfg)?;
            eprintln!(
                "{} after {} steps; outputs in {}",
                out.summary.termination,
                out.summary.steps,
                cfg.output.dir.display()
            );
            if let Some(reason) = &out.summary.failure {
                eprintln!("step failure: {reason}");
            }
            Ok(out.exit_code as u8)
        }
        Command::Classify { config } => {
            let verdict = harness::cmd_classify(&load(&config)?)?;
            print_json(&verdict)?;
            Ok(0)
        }
        Command::Sweep { config, resolve, jobs } => {
            let cfg = load(&config)?;
            let rows = harness::cmd_sweep(&cfg, resolve, jobs)?;
            let bad = harness::sweep::contradictions(&rows);
            eprintln!("{} cells written to {}", rows.len(), cfg.output.dir.join(harness::SWEEP_FILE).display());
            if !bad.is_empty() {
                eprintln!("{} cells contradict their verdict", bad.len());
                return Ok(3);
            }
            Ok(0)
        }
        Command::FitBlowup { timeseries } => {
            let text = fs::read_to_string(&timeseries)
                .with_context(|| format!("reading {}", timeseries.display()))?;
            print_json(&harness::cmd_fit_blowup(&text)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
