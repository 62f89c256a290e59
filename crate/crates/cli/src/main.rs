use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod pipeline;
mod report;

use config::ExperimentConfig;
use pipeline::Pipeline;

#[derive(Parser)]
#[command(
    name = "smellprone",
    version,
    about = "Smell-aware change-proneness experiment pipeline"
)]
struct Cli {
    /// experiment configuration (JSON)
    #[arg(long, value_name = "FILE", global = true)]
    config: Option<PathBuf>,
    /// output directory, overrides the config's `out`
    #[arg(long, value_name = "DIR", global = true)]
    out: Option<PathBuf>,
    /// cross-validation base seed, overrides the config's `cv.base_seed`
    #[arg(long, value_name = "N", global = true)]
    seed: Option<u64>,
    /// skip stages whose artifacts already exist
    #[arg(long, global = true)]
    resume: bool,
    /// worker threads (default: all cores)
    #[arg(long, value_name = "N", global = true)]
    threads: Option<usize>,
    /// detection thresholds (JSON), overrides the config's `thresholds`
    #[arg(long, value_name = "FILE", global = true)]
    thresholds: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse release sources and write per-release metric tables
    Extract,
    /// Detect design smells and compute per-class intensities
    Detect,
    /// Mine the change history into per-release class features
    Mine,
    /// Join metrics, smells, and history into model datasets
    Assemble,
    /// Cross-validate every model on every release
    Evaluate,
    /// Rank features by gain ratio across releases
    Rank,
    /// Compare true-positive sets between models
    Overlap,
    /// Write report.md and summary.json from existing artifacts
    Report,
    /// Run every stage in order
    Run,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }

    let config_path = match &cli.config {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config <FILE> is required");
            return ExitCode::from(1);
        }
    };
    let mut config = match ExperimentConfig::load(&config_path) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    if let Some(seed) = cli.seed {
        config.cv.base_seed = seed;
    }
    let violations = config.validate();
    if !violations.is_empty() {
        eprintln!("invalid configuration {}:", config_path.display());
        for v in &violations {
            eprintln!("  - {v}");
        }
        return ExitCode::from(1);
    }

    let out = cli
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| {
            config_path
                .parent()
                .unwrap_or(Path::new("."))
                .join("out")
        });
    let mut pipeline = match Pipeline::new(config, out, cli.resume, cli.thresholds.as_deref()) {
        Ok(p) => p,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };

    let result = match cli.command {
        Command::Extract => pipeline.stage_extract(),
        Command::Detect => pipeline.stage_detect(),
        Command::Mine => pipeline.stage_mine(),
        Command::Assemble => pipeline.stage_assemble(),
        Command::Evaluate => pipeline.stage_evaluate(),
        Command::Rank => pipeline.stage_rank(),
        Command::Overlap => pipeline.stage_overlap(),
        Command::Report => pipeline.stage_report(),
        Command::Run => pipeline.run_all(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // each variant's Display already embeds its source chain
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
