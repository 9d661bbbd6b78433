use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wce_maxwell::harness::{parse_config, run_experiment, ExperimentConfig, HarnessError, Mode};

#[derive(Parser)]
#[command(
    name = "wce-maxwell",
    version,
    about = "Wiener chaos and Monte Carlo solvers for stochastic Maxwell equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write CSV/JSON outputs.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Energy series for several noise amplitudes.
    ScanSigma {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    let config = match cli.command {
        Command::Run { config, mode, out, workers } => {
            let mut c = load(&config)?;
            c.mode = mode.unwrap_or(c.mode);
            c.output = out.unwrap_or(c.output);
            c.workers = workers.unwrap_or(c.workers);
            c
        }
        Command::ScanSigma { config, values, out, workers } => {
            let mut c = load(&config)?;
            c.sigma_scan = values;
            c.output = out.unwrap_or(c.output);
            c.workers = workers.unwrap_or(c.workers);
            // revalidate so scan values get the same checks as file input
            ExperimentConfig::from_document(c.to_document())?
        }
    };
    if config.mode == Mode::Both && config.mc.samples < 2 {
        return Err(HarnessError::Config("`mc_samples`: mode both needs at least 2 samples".into()));
    }
    let report = run_experiment(&config)?;
    for a in &report.advisories {
        eprintln!("advisory: {a}");
    }
    if let Some(errors) = &report.errors {
        for e in errors {
            match e.relative_error {
                Some(v) => println!("{} moment {}: relative error {v:.4e}", e.component, e.order),
                None => println!("{} moment {}: reference is zero", e.component, e.order),
            }
        }
    }
    let t = &report.timings;
    if let Some(w) = t.wce_seconds {
        println!("wce: {w:.3} s");
    }
    if let Some(m) = t.mc_seconds {
        println!("mc: {m:.3} s");
    }
    println!("outputs written to {}", config.output.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
