//! `effham`: configuration-driven experiments on the effective Hamiltonian.
//!
//! Exit status: 0 when the run finished and every invariant check passed,
//! 2 when an invariant was violated, 1 for usage, configuration or solver errors.

mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use effham_core::Error;

use crate::config::Loaded;
use crate::report::Outcome;

#[derive(Parser, Debug)]
#[command(
    name = "effham",
    version,
    about = "Effective-Hamiltonian experiments driven by a TOML config"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Smoothing parameter a, field moments and the two masses.
    Coupling(RunArgs),
    /// Table of V and V_eff on the configured grid.
    Smooth(RunArgs),
    /// Low eigenvalues of H_V and H_eff with a grid-refinement estimate.
    Spectrum(RunArgs),
    /// Level shifts E_k(H_eff) − E_k(H_V) and their first-order estimates.
    Shift(RunArgs),
    /// Fiber ground energies, coherent-state residuals and a truncation sweep.
    Fiber(RunArgs),
    /// Dressed-state overlaps against |ΔP| with the continuum comparison.
    Overlap(RunArgs),
    /// Residual of the dressed quadratic form against ⟨ψ, H_eff ψ⟩.
    DressedCheck(RunArgs),
    /// Gaussian-weighted L¹ and Rollnik verdicts for the potential.
    Conditions(RunArgs),
    /// inf σ(H_V) ≤ inf σ(H_eff) with grid tolerance.
    Inequality(RunArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML config file.
    config: PathBuf,
    /// Output directory; overrides output.dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed of the ChaCha8 generator used by Monte Carlo estimates; overrides options.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker-thread cap for the parallel kernels.
    #[arg(long)]
    threads: Option<usize>,
}

type Experiment = fn(&Loaded, u64) -> Result<Outcome>;

impl Command {
    fn parts(&self) -> (&'static str, Experiment, &RunArgs) {
        match self {
            Command::Coupling(a) => ("coupling", experiments::coupling, a),
            Command::Smooth(a) => ("smooth", experiments::smooth, a),
            Command::Spectrum(a) => ("spectrum", experiments::spectrum, a),
            Command::Shift(a) => ("shift", experiments::shift, a),
            Command::Fiber(a) => ("fiber", experiments::fiber, a),
            Command::Overlap(a) => ("overlap", experiments::overlap_scan, a),
            Command::DressedCheck(a) => ("dressed-check", experiments::dressed_check, a),
            Command::Conditions(a) => ("conditions", experiments::conditions, a),
            Command::Inequality(a) => ("inequality", experiments::inequality, a),
        }
    }
}

fn uses_seed(name: &str) -> bool {
    name == "conditions"
}

/// Exit status and message prefix for an error.
fn classify(err: &anyhow::Error) -> (u8, &'static str) {
    match err.downcast_ref::<Error>() {
        Some(Error::InvariantViolation(_)) | Some(Error::PositivityViolation { .. }) => (2, "invariant violated"),
        Some(Error::ConvergenceFailure { .. }) => (1, "solver did not converge"),
        Some(_) => (1, "invalid input"),
        None => (1, "configuration error"),
    }
}

fn run(cli: Cli) -> Result<u8> {
    let (name, experiment, args) = cli.command.parts();
    if let Some(n) = args.threads {
        anyhow::ensure!(n > 0, "--threads must be positive");
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the worker pool")?;
    }
    let mut loaded = config::load(&args.config)?;
    if let Some(dir) = &args.out {
        loaded.config.output.dir = Some(dir.clone());
    }
    if let Some(seed) = args.seed {
        loaded.config.options.seed = Some(seed);
    }
    let seed = loaded.config.options.seed.unwrap_or_else(experiments::default_seed);
    let dir = loaded
        .config
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("effham-out"));
    let report_seed = uses_seed(name).then_some(seed);

    let start = Instant::now();
    let (outcome, code) = match experiment(&loaded, seed) {
        Ok(o) => {
            let code = if o.passed() { 0 } else { 2 };
            (o, code)
        }
        Err(e) => {
            let (code, prefix) = classify(&e);
            if code != 2 {
                return Err(e.context(prefix));
            }
            // Keep a report of the violation next to the usual outputs.
            let mut o = Outcome::default();
            o.check("invariant", false, format!("{e:#}"));
            (o, code)
        }
    };
    let path = report::write(
        &dir,
        name,
        &loaded.config,
        report_seed,
        &outcome,
        start.elapsed().as_secs_f64(),
    )?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    for c in outcome.checks.iter().filter(|c| !c.passed) {
        eprintln!("invariant violated: {}: {}", c.name, c.detail);
    }
    println!("{}", path.display());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify(&e).0)
        }
    }
}
