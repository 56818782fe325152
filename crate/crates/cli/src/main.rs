use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use recovery_core::network::ServiceMode;
use recovery_core::planner::{Lookahead, Pooling};
use recovery_core::runner::{run_experiment, write_testbed, BaseKind, ExperimentConfig, ObjectiveKind};
use recovery_core::sim::F2Normalization;

/// Post-earthquake repair scheduling for power distribution networks.
#[derive(Parser)]
#[command(name = "recovery", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan repairs for a batch of damage scenarios.
    Plan(PlanArgs),
    /// Write the bundled synthetic testbed and a matching config.
    GenerateTestbed {
        #[arg(long)]
        out: PathBuf,
        /// Seed for the cell population jitter.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Flags override the matching config keys.
#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    objective: Option<ObjectiveKind>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    resources: Option<usize>,
    #[arg(long)]
    base: Option<BaseKind>,
    /// full, one-step, n-step or random-cap.
    #[arg(long)]
    pooling: Option<Pooling>,
    #[arg(long)]
    cap: Option<usize>,
    /// 1, 2 or full.
    #[arg(long)]
    lookahead: Option<Lookahead>,
    #[arg(long)]
    scenarios: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// case1 (households) or case2 (households and retailers).
    #[arg(long)]
    mode: Option<ServiceMode>,
    /// final-interval or cumulative-time.
    #[arg(long)]
    f2_normalization: Option<F2Normalization>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl PlanArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        let p = &mut cfg.plan;
        set(&mut p.objective, self.objective);
        set(&mut p.gamma, self.gamma);
        set(&mut p.resources, self.resources);
        set(&mut p.base, self.base);
        set(&mut p.pooling, self.pooling);
        set(&mut p.cap, self.cap);
        set(&mut p.lookahead, self.lookahead);
        set(&mut p.mode, self.mode);
        set(&mut p.f2_normalization, self.f2_normalization);
        let r = &mut cfg.run;
        set(&mut r.scenarios, self.scenarios);
        set(&mut r.seed, self.seed);
        set(&mut r.threads, self.threads);
        set(&mut r.out, self.out.clone());
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn plan(args: &PlanArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::from_file(&args.config)?;
    args.apply(&mut cfg);
    let summary = run_experiment(&cfg).with_context(|| format!("experiment from {}", args.config.display()))?;
    println!(
        "{} scenarios, objective {:?}: base {:.4} +/- {:.4}, rollout {:.4} +/- {:.4}",
        summary.rows.len(),
        cfg.plan.objective,
        summary.base_value.mean,
        summary.base_value.std,
        summary.rollout_value.mean,
        summary.rollout_value.std,
    );
    println!(
        "days to {:.0}% served: base {:.2}, rollout {:.2}",
        cfg.plan.gamma * 100.0,
        summary.base_days_to_gamma.mean,
        summary.rollout_days_to_gamma.mean,
    );
    println!("outputs in {}", cfg.run.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(args) => plan(args),
        Command::GenerateTestbed { out, seed } => {
            write_testbed(out, *seed).with_context(|| format!("writing testbed to {}", out.display()))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
