//! A short soft-intervention run with regret curves.

use mcbo::engine::{run, Algo, RunConfig};
use mcbo::metrics::{average_reward, cumulative_regret};

fn main() -> mcbo::Result<()> {
    let task = std::env::args().nth(1).unwrap_or_else(|| "dropwave".into());
    let cfg = RunConfig {
        task,
        algo: Algo::Mcbo,
        beta: 0.5,
        rounds: 15,
        seed: 4,
        ..RunConfig::default()
    };
    let result = run(&cfg)?;
    let regret = cumulative_regret(&result.records, result.optimum);
    let avg = average_reward(&result.records);
    println!("optimum {:.4} at {}", result.optimum, result.optimal_intervention.to_compact_json());
    for (k, r) in result.records.iter().enumerate() {
        println!(
            "t={:>2} E[y]={:>8.4} avg={:>8.4} regret={:>8.4}",
            r.t, r.expected_reward, avg.values[k], regret.values[k]
        );
    }
    Ok(())
}
