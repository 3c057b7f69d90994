use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rkhs_sampling::experiment::{run, write_outputs, ExperimentConfig, ExperimentKind};

/// Monte Carlo studies of weighted least-squares recovery and sampling discretization.
#[derive(Debug, Parser)]
#[command(name = "rkhs-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact recovery errors against the probabilistic bound.
    Recover(RunArgs),
    /// Exact discretization errors against the probabilistic bound.
    Discretize(RunArgs),
    /// Extreme eigenvalues of the normalized Gram matrix.
    EigCheck(RunArgs),
    /// Tail of the norm of centred sums of bounded random vectors.
    Concentration(RunArgs),
    /// Median errors, bounds and baseline over a grid of sample sizes.
    Sweep(RunArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; defaults to the configured one, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn split(self) -> (ExperimentKind, RunArgs) {
        match self {
            Command::Recover(a) => (ExperimentKind::Recover, a),
            Command::Discretize(a) => (ExperimentKind::Discretize, a),
            Command::EigCheck(a) => (ExperimentKind::EigCheck, a),
            Command::Concentration(a) => (ExperimentKind::Concentration, a),
            Command::Sweep(a) => (ExperimentKind::Sweep, a),
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<bool> {
    let (kind, args) = cli.command.split();
    let mut config = ExperimentConfig::from_path(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    match config.kind {
        Some(k) if k != kind => bail!(
            "config `{}` declares kind `{}` but the `{}` subcommand was used",
            args.config.display(),
            k.name(),
            kind.name()
        ),
        _ => config.kind = Some(kind),
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if args.threads.is_some() {
        config.threads = args.threads;
    }
    let out = args
        .out
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let report = run(&config)?;
    let written = write_outputs(&report, &out)?;

    let s = &report.summary;
    println!("kind {}  seed {}  config {}", s.kind, s.seed, &s.config_hash[..16]);
    println!("records {}  flagged {}", s.records, s.flagged);
    if let (Some(max), Some(med)) = (s.max_value, s.median_value) {
        println!("max {max:.6e}  median {med:.6e}");
    }
    for b in &s.bounds {
        println!("bound {:<32} {:.6e}", b.name, b.value);
    }
    if let Some(sw) = &s.sweep {
        println!(
            "slopes  wce {:.4}  bound {:.4}  baseline {:.4}",
            sw.wce_slope, sw.bound_slope, sw.baseline_slope
        );
    }
    for p in &s.predicates {
        let tag = if p.pass { "PASS" } else { "FAIL" };
        println!("{tag} {:<32} observed {:.6} allowed {:.6}", p.name, p.observed, p.allowed);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
