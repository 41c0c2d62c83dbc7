//! Experiment driver: reproducible runs from JSON configs with CSV and
//! manifest emission.
//!
//! Exit codes: 0 ok, 2 config error, 3 numerical non-convergence.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{catalog, RunConfig};
use output::{write_manifest, RunManifest};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "fvqerr", version, about = "Open-system error-scaling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config file.
    Run { config: PathBuf },
    /// List the experiment catalog with runnable default configs.
    List,
    /// Parse and validate a config file without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    // single-threaded BLAS keeps floating-point reductions, and therefore the
    // emitted CSV bytes, identical across runs; task-level parallelism comes
    // from the rayon pool
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    }
    if let Ok(threads) = std::env::var("FVQERR_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::List => {
            for cfg in catalog() {
                println!("{}", cfg.experiment.name());
                let text = serde_json::to_string(&cfg)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                println!("  default: {text}");
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load(&config)?;
            cfg.validate().map_err(CliError::Config)?;
            println!("ok: {} experiment config valid", cfg.experiment.name());
            Ok(())
        }
        Command::Run { config } => {
            let cfg = load(&config)?;
            cfg.validate().map_err(CliError::Config)?;
            std::fs::create_dir_all(&cfg.output_dir).map_err(|e| {
                CliError::Config(format!(
                    "cannot create output dir {}: {e}",
                    cfg.output_dir.display()
                ))
            })?;
            let start = Instant::now();
            let (outputs, summary) = experiments::run_experiment(&cfg, &cfg.output_dir)?;
            let manifest = RunManifest {
                experiment: cfg.experiment.name().to_string(),
                tool_version: env!("CARGO_PKG_VERSION"),
                seed: cfg.seed,
                config: serde_json::to_value(&cfg)
                    .map_err(|e| CliError::Config(e.to_string()))?,
                tolerances: serde_json::to_value(&cfg.tolerances)
                    .map_err(|e| CliError::Config(e.to_string()))?,
                wall_time_s: start.elapsed().as_secs_f64(),
                outputs: outputs
                    .iter()
                    .map(|p| {
                        p.file_name()
                            .map(|f| f.to_string_lossy().into_owned())
                            .unwrap_or_default()
                    })
                    .collect(),
                summary,
            };
            let manifest_path = write_manifest(&cfg.output_dir, &manifest)?;
            for p in outputs.iter().chain(std::iter::once(&manifest_path)) {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
    }
}

fn load(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config parse error: {e}")))
}
