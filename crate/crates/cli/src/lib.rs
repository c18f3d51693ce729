//! Command-line front end: runs the covariance, CLT, Volterra, property-check and
//! rate pipelines and writes CSV tables, a JSON summary and SVG plots.

pub mod commands;
pub mod config;
pub mod exit;
pub mod report;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};
use exit::{CliError, EXIT_PASS, EXIT_PROPERTY};
use report::ReportBundle;

#[derive(Debug, Parser)]
#[command(name = "hamf", version, about = "Spatial averages of the hyperbolic Anderson model with rough noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration; command-line flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true, env = "HAMF_WORKERS", value_name = "N")]
    pub workers: Option<usize>,
    /// Print the JSON summary and skip the SVG plots.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Limiting covariance K_theta(t, s) and the first-chaos decay.
    Covariance,
    /// Normality diagnostics of F_R over a list of radii.
    Clt,
    /// J functionals, Gronwall sequence, Picard majorant and the lattice scheme.
    Volterra,
    /// The full property suite.
    Check,
    /// First-chaos decay rate and the tightness bound.
    Rate,
}

impl Command {
    pub fn run(self, cfg: &RunConfig) -> Result<ReportBundle, CliError> {
        match self {
            Command::Covariance => commands::covariance::run(cfg),
            Command::Clt => commands::clt::run(cfg),
            Command::Volterra => commands::volterra::run(cfg),
            Command::Check => commands::check::run(cfg),
            Command::Rate => commands::rate::run(cfg),
        }
    }
}

fn execute(cli: &Cli) -> Result<ReportBundle, CliError> {
    let overrides = Overrides { seed: cli.seed, out_dir: cli.out_dir.clone() };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    let pool = match cli.workers {
        Some(0) => return Err(CliError::Config("workers must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n),
        None => rayon::ThreadPoolBuilder::new(),
    }
    .build()
    .map_err(|e| CliError::Resource(format!("thread pool: {e}")))?;
    // fail on an unusable output directory before any long computation
    std::fs::create_dir_all(&cfg.out_dir)
        .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", cfg.out_dir.display())))?;
    let bundle = pool.install(|| cli.command.run(&cfg))?;
    let written = bundle.write(&cfg.out_dir, &cfg, !cli.json)?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&bundle.summary(&cfg)).unwrap_or_default());
    } else {
        for p in &bundle.properties {
            println!("{} {} (margin {})", if p.passed { "pass" } else { "FAIL" }, p.name, p.margin);
        }
        for w in written {
            println!("wrote {}", w.display());
        }
    }
    Ok(bundle)
}

/// Runs the parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(&cli) {
        Ok(b) if b.passed() => EXIT_PASS,
        Ok(b) => {
            eprintln!("property failure: {}", b.failures().join(", "));
            EXIT_PROPERTY
        }
        Err(e) => {
            eprintln!("hamf: {e}");
            e.code()
        }
    }
}
