use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use mcbo::engine::Algo;
use mcbo::experiment::{run_experiment, sweep_beta, ExperimentSpec, DEFAULT_BETAS};

#[derive(Parser)]
#[command(name = "mcbo", about = "Model-based causal Bayesian optimization experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every configured (run, seed) pair.
    Run(Overrides),
    /// Run every configuration once per beta and summarize.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// Comma-separated betas.
        #[arg(long, value_delimiter = ',')]
        betas: Vec<f64>,
    },
}

/// Flags override the config file for every run in it.
#[derive(Args)]
struct Overrides {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    algo: Option<Algo>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    rounds: Option<usize>,
    /// Number of seeds derived from the master seed.
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    master_seed: Option<u64>,
    #[arg(long)]
    noisy: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    jobs: Option<usize>,
    /// Record per-round wall time (CSV no longer byte-reproducible).
    #[arg(long)]
    timing: bool,
}

impl Overrides {
    fn load(&self) -> Result<ExperimentSpec> {
        let mut spec = ExperimentSpec::from_file(&self.config)
            .with_context(|| format!("loading {}", self.config.display()))?;
        for run in &mut spec.runs {
            if let Some(t) = &self.task {
                run.task = t.clone();
                run.task_file = None;
            }
            if let Some(a) = self.algo {
                run.algo = a;
            }
            if let Some(b) = self.beta {
                run.beta = b;
            }
            if let Some(r) = self.rounds {
                run.rounds = r;
            }
            run.noisy |= self.noisy;
            run.timing |= self.timing;
        }
        if let Some(n) = self.seeds {
            spec.seeds.clear();
            spec.num_seeds = n;
        }
        if let Some(m) = self.master_seed {
            spec.master_seed = m;
        }
        if let Some(o) = &self.out {
            spec.output_dir = o.clone();
        }
        if let Some(j) = self.jobs {
            spec.jobs = j;
        }
        Ok(spec)
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run() {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} run(s) failed; see manifest.json");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<usize> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(o) => {
            let spec = o.load()?;
            log::info!("{} run(s) x {} seed(s)", spec.runs.len(), spec.resolved_seeds().len());
            let report = run_experiment(&spec)?;
            println!("wrote results to {}", spec.output_dir.display());
            Ok(report.failures())
        }
        Cmd::Sweep { overrides, betas } => {
            let spec = overrides.load()?;
            let betas = if betas.is_empty() { DEFAULT_BETAS.to_vec() } else { betas };
            let (report, choices) = sweep_beta(&spec, &betas)?;
            for c in &choices {
                println!("{:>20} {:>12} beta={} (mean rank {:.2})", c.held_out, c.metric, c.beta, c.mean_rank);
            }
            Ok(report.failures())
        }
    }
}
