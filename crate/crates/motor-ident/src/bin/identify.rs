//! Command-line front end for the identification experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use motor_ident::harness::{self, AlgoTag, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "identify",
    about = "Induction motor parameter identification from startup currents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the reference startup waveform as CSV.
    Simulate {
        /// Experiment configuration file (flat key = value text).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for reference.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the identification experiment and write all result CSVs.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Restrict to one optimizer: cpso, psol, psog, ga, ls, or all.
        #[arg(long)]
        algo: Option<String>,
        /// Base seed; run k uses seed + k.
        #[arg(long)]
        seed: Option<u64>,
        /// Independent runs per optimizer.
        #[arg(long)]
        runs: Option<u32>,
        /// Fitness evaluations per run.
        #[arg(long)]
        budget: Option<u64>,
        /// Sequential execution with zeroed wall times; output files are
        /// byte-identical across invocations.
        #[arg(long)]
        deterministic: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute the summary tables from a run directory's CSVs.
    Report {
        /// Directory produced by `identify run`.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    ExperimentConfig::from_config_str(&text)
}

fn run() -> Result<(), String> {
    match Cli::parse().command {
        Command::Simulate { config, out } => {
            let config = load_config(&config)?;
            config.validate()?;
            let reference = harness::generate_reference(&config).map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&out)
                .map_err(|e| format!("cannot create {}: {e}", out.display()))?;
            let path = out.join("reference.csv");
            reference.write_csv(&path).map_err(|e| e.to_string())?;
            println!(
                "wrote {} ({} samples over {} s)",
                path.display(),
                reference.len(),
                config.supply.horizon
            );
            Ok(())
        }
        Command::Run {
            config,
            algo,
            seed,
            runs,
            budget,
            deterministic,
            out,
        } => {
            let mut config = load_config(&config)?;
            if let Some(algo) = algo {
                config.algos = match algo.as_str() {
                    "all" => AlgoTag::ALL.to_vec(),
                    name => vec![AlgoTag::parse(name)
                        .ok_or_else(|| format!("unknown optimizer `{name}`"))?],
                };
            }
            if let Some(seed) = seed {
                config.base_seed = seed;
            }
            if let Some(runs) = runs {
                config.runs = runs;
            }
            if let Some(budget) = budget {
                config.budget = budget;
            }
            if deterministic {
                config.deterministic = true;
            }
            let output = harness::run_experiment(&config, &out).map_err(|e| e.to_string())?;
            println!(
                "{} optimizer runs written to {}",
                output.records.len(),
                out.display()
            );
            print!("{}", harness::render_tables(&output.stats));
            Ok(())
        }
        Command::Report { input } => {
            let (stats, _) = harness::report(&input).map_err(|e| e.to_string())?;
            print!("{}", harness::render_tables(&stats));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
