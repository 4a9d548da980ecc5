use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use srpf_cli::run::{self, Context, Outcome};
use srpf_cli::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "srpf", version, about = "Spectra, sweeps and checks for the truncated spin-1/2 fiber model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run config; defaults are used for anything missing.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Result cache file (overrides `cache_path`).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-P spectrum reports and `spectrum.csv`.
    Spectrum,
    /// Spectrum plus bound columns and a min-over-P summary.
    Sweep,
    /// Every invariant suite; exit 1 if a hard check fails.
    Verify,
    /// Operator sandwich, envelope and eigenvalue counting.
    Bounds,
    /// Ground energy along the refinement ladder.
    Convergence,
    /// Kramers certificates along the momentum list.
    Kramers,
    /// Run the config's `tasks` list.
    Run,
    /// Print the effective config as TOML.
    PrintConfig,
}

fn load(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(cache) = &cli.cache {
        cfg.cache_path = Some(cache.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli, cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let ctx = Context::new(cfg)?;
    match cli.command {
        Command::Spectrum => run::run_spectrum(&ctx),
        Command::Sweep => run::run_sweep(&ctx),
        Command::Verify => run::run_verify(&ctx),
        Command::Bounds => run::run_bounds(&ctx),
        Command::Convergence => run::run_convergence(&ctx),
        Command::Kramers => run::run_kramers(&ctx),
        Command::Run => run::run_tasks(&ctx),
        Command::PrintConfig => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Command::PrintConfig = cli.command {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    match execute(&cli, &cfg) {
        Ok(out) => {
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            for msg in &out.failures {
                eprintln!("FAIL {msg}");
            }
            if out.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
