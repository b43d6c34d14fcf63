use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use critmoments::exec::Execution;

mod config;
mod report;
mod run;

use config::{ExperimentConfig, ValidationError};
use run::Summary;

const EXIT_VALIDATION: u8 = 2;
const EXIT_DEGENERACY: u8 = 3;
const EXIT_CHECK: u8 = 4;

#[derive(Parser)]
#[command(
    name = "critmoments",
    version,
    about = "Run and summarise zero-count moment experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `output.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run with this single seed instead of the configured list.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the Monte Carlo loops.
        #[arg(long)]
        threads: Option<usize>,
        /// Apply acceptance tolerances and exit with 4 if any fails.
        #[arg(long)]
        check: bool,
    },
    /// Print summary tables for the artifacts in a run directory.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize, Deserialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub version: String,
    pub seeds: Vec<u64>,
    pub wall_time_s: f64,
    pub csv: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            threads,
            check,
        } => run_command(&config, out, seed, threads, check),
        Command::Report { out } => report::report(&out).map(|text| {
            print!("{text}");
            ExitCode::SUCCESS
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<ValidationError>().is_some() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

fn run_command(
    path: &Path,
    out: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
    check: bool,
) -> Result<ExitCode> {
    let mut cfg =
        ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?;
    if let Some(dir) = out {
        cfg.output.dir = Some(dir);
    }
    if let Some(seed) = seed {
        cfg.seeds = vec![seed];
    }
    cfg.validate()?;
    if let Some(n) = threads {
        set_threads(n)?;
    }
    let dir = cfg.output.dir.clone().expect("validated");
    let start = Instant::now();
    let artifacts = match run::run(&cfg, Execution::Parallel) {
        Ok(a) => a,
        Err(err) => {
            let degenerate = err
                .chain()
                .filter_map(|e| e.downcast_ref::<critmoments::Error>())
                .any(|e| e.is_degeneracy());
            if degenerate {
                eprintln!("numerical degeneracy: {err:#}");
                eprintln!("offending config:\n{}", cfg.to_toml());
                return Ok(ExitCode::from(EXIT_DEGENERACY));
            }
            return Err(err);
        }
    };
    let wall_time_s = start.elapsed().as_secs_f64();

    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join(&artifacts.csv_name), &artifacts.csv)?;
    let summary = Summary {
        kind: cfg.kind,
        config_hash: cfg.hash(),
        results: artifacts.results,
        checks: artifacts.checks,
    };
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    let manifest = Manifest {
        config_hash: cfg.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seeds: cfg.seeds.clone(),
        wall_time_s,
        csv: artifacts.csv_name.clone(),
        config: cfg,
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest)? + "\n",
    )?;

    for c in &summary.checks {
        println!(
            "{} {}: {:.3e} (tolerance {:.3e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        );
    }
    println!("wrote {} in {wall_time_s:.1}s", dir.display());
    if check && summary.checks.iter().any(|c| !c.passed) {
        return Ok(ExitCode::from(EXIT_CHECK));
    }
    Ok(ExitCode::SUCCESS)
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<()> {
    if n == 0 {
        return Err(ValidationError {
            field: "--threads".into(),
            message: "must be positive".into(),
        }
        .into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring the thread pool")
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: usize) -> Result<()> {
    eprintln!("warning: built without the parallel feature; --threads ignored");
    Ok(())
}
