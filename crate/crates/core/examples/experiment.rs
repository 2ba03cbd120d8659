//! A small multi-seed experiment and a beta sweep written to a temp dir.

use mcbo::engine::{Algo, RunConfig};
use mcbo::experiment::{run_experiment, sweep_beta, ExperimentSpec};

fn main() -> mcbo::Result<()> {
    let out = std::env::temp_dir().join("mcbo_example");
    let spec = ExperimentSpec {
        runs: vec![
            RunConfig {
                task: "toygraph".into(),
                algo: Algo::McboHard,
                rounds: 8,
                ..RunConfig::default()
            },
            RunConfig {
                task: "chain_synthetic".into(),
                algo: Algo::Mcbo,
                rounds: 8,
                ..RunConfig::default()
            },
        ],
        num_seeds: 3,
        master_seed: 1,
        output_dir: out.clone(),
        ..ExperimentSpec::default()
    };
    let report = run_experiment(&spec)?;
    println!("config hash {}", report.manifest.config_hash);
    for run in &report.manifest.runs {
        println!("{:<40} optimum {:?} files {:?}", run.label, run.optimum, run.files);
    }

    let sweep = ExperimentSpec {
        output_dir: out.join("sweep"),
        ..spec
    };
    let (_, choices) = sweep_beta(&sweep, &[0.1, 1.0])?;
    for c in choices {
        println!("held out {:<16} {:<12} beta {} (mean rank {:.2})", c.held_out, c.metric, c.beta, c.mean_rank);
    }
    println!("results in {}", out.display());
    Ok(())
}
