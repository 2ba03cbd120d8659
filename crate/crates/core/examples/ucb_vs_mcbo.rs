//! MCBO against a structure-agnostic GP-UCB on the same task and seeds.

use mcbo::acquisition::AcqConfig;
use mcbo::engine::{reference_optimum, run_with_optimum, Algo, OracleConfig, RunConfig};
use mcbo::scm::make_task;

fn main() -> mcbo::Result<()> {
    let scm = make_task("tree_synthetic", false, 0)?;
    let optimum = reference_optimum(&scm, &OracleConfig { grid: 7, ..OracleConfig::default() })?;
    println!("reference optimum {:.4}", optimum.1);
    let acq = AcqConfig {
        restarts: 3,
        grad_steps: 40,
        raw_candidates: 40,
        ..AcqConfig::default()
    };
    for algo in [Algo::Mcbo, Algo::UcbBaseline] {
        let mut finals = Vec::new();
        for seed in 0..3 {
            let cfg = RunConfig {
                task: "tree_synthetic".into(),
                algo,
                rounds: 30,
                seed,
                acq: acq.clone(),
                ..RunConfig::default()
            };
            let r = run_with_optimum(&scm, &cfg, Some(&optimum))?;
            finals.push(r.expected_rewards().iter().sum::<f64>() / cfg.rounds as f64);
        }
        println!("{algo:?}: final average reward per seed {finals:.3?}");
    }
    Ok(())
}
