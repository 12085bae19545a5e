//! `covlaws`: command line runner for the spectral-theory and local-law experiments.
//!
//! Exit status is 0 on success, 2 when `--assert` is given and a threshold check fails, and 1
//! on any error.

mod commands;
mod config;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::commands::Debug;
use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::output::{model_hash, Artifacts, Manifest};

#[derive(Parser)]
#[command(name = "covlaws", version, about = "Spectral theory and local-law experiments for sample covariance and deformed Wigner matrices")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `trials` of the configuration.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, env = "COVLAWS_OUT_DIR", default_value = "covlaws-out")]
    out: PathBuf,
    /// Exit with status 2 when a threshold check fails.
    #[arg(long = "assert", global = true)]
    assert_mode: bool,
    /// Size of the worker pool. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Debug: add this shift to m before forming the deterministic equivalents.
    #[arg(long, global = true, allow_negative_numbers = true)]
    corrupt_m: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Density on a grid (density.csv, edges.json, density.svg).
    Density,
    /// Spectral edges, curvatures and regularity.
    Edges,
    /// Classical eigenvalue locations.
    Gamma,
    /// Anisotropic and averaged local-law error scan.
    VerifyLocalLaw,
    /// Rigidity ratios of sampled eigenvalues.
    Rigidity,
    /// Eigenvalues far from the support.
    GapCheck,
    /// Rescaled extreme eigenvalues against a GOE reference.
    EdgeStats,
    /// Deformed Wigner variants.
    #[command(subcommand)]
    Wigner(WignerCommand),
    /// Moment coefficients of the Bernoulli interpolation.
    Kcoeffs,
}

#[derive(Subcommand)]
enum WignerCommand {
    Density,
    Edges,
    VerifyLocalLaw,
    EdgeStats,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::Density => "density",
            Self::Edges => "edges",
            Self::Gamma => "gamma",
            Self::VerifyLocalLaw => "verify-local-law",
            Self::Rigidity => "rigidity",
            Self::GapCheck => "gap-check",
            Self::EdgeStats => "edge-stats",
            Self::Wigner(WignerCommand::Density) => "wigner density",
            Self::Wigner(WignerCommand::Edges) => "wigner edges",
            Self::Wigner(WignerCommand::VerifyLocalLaw) => "wigner verify-local-law",
            Self::Wigner(WignerCommand::EdgeStats) => "wigner edge-stats",
            Self::Kcoeffs => "kcoeffs",
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::parse(&format!("{{\"schema_version\": {SCHEMA_VERSION}}}"), "defaults")?,
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    Ok(cfg)
}

/// Number of blocks faer splits its parallel kernels into. Fixing it makes the summation order,
/// and so every output bit, independent of `--threads`.
const LINALG_SPLIT: usize = 8;

fn run(cli: Cli) -> Result<bool> {
    let start = Instant::now();
    let common = &cli.common;
    if let Some(t) = common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("building the worker pool")?;
    }
    faer::set_global_parallelism(faer::Par::rayon(LINALG_SPLIT));
    let cfg = load_config(common)?;
    let mut out = Artifacts::create(&common.out)?;
    let debug = Debug { corrupt_m: common.corrupt_m };
    let checks = match &cli.command {
        Command::Density => commands::density(&cfg, &mut out),
        Command::Edges => commands::edges(&cfg, &mut out),
        Command::Gamma => commands::gamma(&cfg, &mut out),
        Command::VerifyLocalLaw => commands::verify_local_law(&cfg, debug, &mut out),
        Command::Rigidity => commands::rigidity(&cfg, &mut out),
        Command::GapCheck => commands::gap_check(&cfg, &mut out),
        Command::EdgeStats => commands::edge_stats(&cfg, &mut out),
        Command::Wigner(WignerCommand::Density) => commands::wigner_density(&cfg, &mut out),
        Command::Wigner(WignerCommand::Edges) => commands::wigner_edges(&cfg, &mut out),
        Command::Wigner(WignerCommand::VerifyLocalLaw) => commands::wigner_verify_local_law(&cfg, debug, &mut out),
        Command::Wigner(WignerCommand::EdgeStats) => commands::wigner_edge_stats(&cfg, &mut out),
        Command::Kcoeffs => commands::kcoeffs(&cfg, &mut out),
    }
    .with_context(|| format!("{} failed", cli.command.name()))?;
    for c in &checks {
        println!("check {}: {:.6} <= {} {}", c.name, c.value, c.limit, if c.pass { "PASS" } else { "FAIL" });
    }
    if debug.corrupt_m.is_some() {
        println!("note: --corrupt-m was set; the manifest does not reproduce this run");
    }
    let mut outputs = out.files().to_vec();
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        command: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        model_hash: model_hash(&cfg),
        seed: cfg.seed,
        trials: cfg.trials,
        threads: common.threads,
        checks: &checks,
        wall_time_s: start.elapsed().as_secs_f64(),
        outputs,
        config: &cfg,
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(checks.iter().all(|c| c.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let assert_mode = cli.common.assert_mode;
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if assert_mode => ExitCode::from(2),
        Ok(false) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
