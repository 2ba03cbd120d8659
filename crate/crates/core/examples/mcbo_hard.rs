//! Hard interventions on the noisy toy graph: which target sets get picked.

use std::collections::BTreeMap;

use mcbo::engine::{run, Algo, RunConfig};

fn main() -> mcbo::Result<()> {
    let cfg = RunConfig {
        task: "toygraph".into(),
        noisy: true,
        algo: Algo::McboHard,
        rounds: 30,
        seed: 7,
        ..RunConfig::default()
    };
    let result = run(&cfg)?;
    println!("oracle choice {} ({:.3})", result.optimal_intervention.to_compact_json(), result.optimum);
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for r in &result.records {
        *counts.entry(format!("{:?}", r.intervention.targets().0)).or_default() += 1;
    }
    for (targets, n) in counts {
        println!("{targets:>8}: {n} rounds");
    }
    let last = result.records.last().expect("rounds");
    println!("last intervention {}", last.intervention.to_compact_json());
    Ok(())
}
