use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bandit_tails::stats::FitMode;
use bandit_tails_cli::config::{parse_config, ExperimentPlan};
use bandit_tails_cli::output::{
    ensure_dir, fits_from_files, write_artifact, write_bounds_csv, write_episodes_jsonl, write_fits_csv,
    write_manifest, write_oracle_csv, write_summary_csv,
};
use bandit_tails_cli::run::{bound_curves, oracle_check, run_plan};

#[derive(Parser)]
#[command(name = "bandit-tails", version, about = "Regret-tail experiments for stochastic and linear bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment plan (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Overrides the plan's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    PolyTail,
    StretchTail,
    RegretScaling,
}

impl From<Mode> for FitMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::PolyTail => FitMode::PolyTail,
            Mode::StretchTail => FitMode::StretchTail,
            Mode::RegretScaling => FitMode::RegretScaling,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Replicate episodes; writes episodes.jsonl and summary.csv.
    Simulate(RunArgs),
    /// Full run: tail curves with matched bounds, summaries, fits, episodes.
    Tail(RunArgs),
    /// Full run over a plan that contains a worst-case gap sweep.
    Sweep(RunArgs),
    /// Exponent fits from previously written CSV files.
    Fit {
        #[arg(long)]
        mode: Mode,
        /// summary.csv, for regret_scaling.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// tail.csv, for the tail modes.
        #[arg(long)]
        tail: Option<PathBuf>,
        /// Tail threshold as a fraction of T.
        #[arg(long)]
        fraction: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Bound curves only, no simulation.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Exact enumeration versus Monte Carlo for enumerable cells.
    Oracle(RunArgs),
}

fn load(path: &Path, seed: Option<u64>) -> Result<ExperimentPlan> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut plan = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    if let Some(s) = seed {
        plan.seed = s;
    }
    Ok(plan)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Simulate(a) => {
            let mut plan = load(&a.config, a.seed)?;
            plan.outputs.episodes = true;
            let artifact = run_plan(&plan, a.threads)?;
            let dir = ensure_dir(&a.out)?;
            write_episodes_jsonl(&artifact.episodes, &dir.join("episodes.jsonl"))?;
            write_summary_csv(&artifact.summaries, &dir.join("summary.csv"))?;
            write_manifest(&plan, &dir, &["episodes.jsonl", "summary.csv"])?;
            println!("{} episodes written to {}", artifact.episodes.len(), dir.display());
        }
        Command::Tail(a) => full_run(&a, false)?,
        Command::Sweep(a) => full_run(&a, true)?,
        Command::Fit {
            mode,
            summary,
            tail,
            fraction,
            out,
        } => {
            let rows = fits_from_files(summary.as_deref(), tail.as_deref(), mode.into(), fraction)?;
            let dir = ensure_dir(&out)?;
            write_fits_csv(&rows, &dir.join("fits.csv"))?;
            for r in &rows {
                match r.slope {
                    Some(s) => println!("{}: slope {s:.4} (r2 {:.3})", r.policy, r.r_squared.unwrap_or(f64::NAN)),
                    None => println!("{}: {}", r.policy, r.status),
                }
            }
        }
        Command::Bounds { config, out } => {
            let plan = load(&config, None)?;
            let rows = bound_curves(&plan)?;
            let dir = ensure_dir(&out)?;
            write_bounds_csv(&rows, &dir.join("bounds.csv"))?;
            write_manifest(&plan, &dir, &["bounds.csv"])?;
            println!("{} bound values written to {}", rows.len(), dir.display());
        }
        Command::Oracle(a) => {
            let plan = load(&a.config, a.seed)?;
            let rows = oracle_check(&plan, a.threads)?;
            if rows.is_empty() {
                bail!("no enumerable cells: need two-point noise, K <= 3 and T <= 14");
            }
            let dir = ensure_dir(&a.out)?;
            write_oracle_csv(&rows, &dir.join("oracle.csv"))?;
            write_manifest(&plan, &dir, &["oracle.csv"])?;
            for r in &rows {
                println!(
                    "{} T={}: KS {:.5}, max atom z {:.2}, mean exact {:.6} vs sampled {:.6}",
                    r.policy, r.horizon, r.ks, r.max_atom_z, r.exact_mean, r.sample_mean
                );
            }
        }
    }
    Ok(())
}

fn full_run(a: &RunArgs, require_sweep: bool) -> Result<()> {
    let plan = load(&a.config, a.seed)?;
    if require_sweep && !plan.has_sweep() {
        bail!("sweep needs at least one instance with a `sweep` rule");
    }
    let artifact = run_plan(&plan, a.threads)?;
    let manifest = write_artifact(&plan, &artifact, &a.out)?;
    println!(
        "{} tail rows, {} fits written to {} (plan {})",
        artifact.tail.len(),
        artifact.fits.len(),
        a.out.display(),
        &manifest.plan_sha256[..12]
    );
    Ok(())
}
