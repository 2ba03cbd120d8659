//! Simulate the catalog tasks under a few interventions.

use mcbo::graph::InterventionTargets;
use mcbo::scm::{expected_reward, make_task, simulate, Intervention, TASK_NAMES};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcbo::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for name in TASK_NAMES {
        let scm = make_task(name, false, 0)?;
        println!(
            "{name:>16}: {} nodes, {} actions",
            scm.dag().num_nodes(),
            scm.num_actions()
        );
    }

    let toy = make_task("toygraph", true, 0)?;
    println!("\n{}", toy.describe());
    let ivs = [
        Intervention::Observational,
        Intervention::hard(InterventionTargets::new([0]), vec![vec![-2.0]]),
        Intervention::hard(InterventionTargets::new([1]), vec![vec![0.0]]),
    ];
    for iv in &ivs {
        let s = simulate(&toy, iv, &mut rng)?;
        let e = expected_reward(&toy, iv, 4000, &mut rng)?;
        println!("{:<60} sample y = {:>7.3}  E[y] ~ {e:.3}", iv.to_compact_json(), s.reward);
    }

    let chain = make_task("chain_synthetic", false, 0)?;
    let iv = Intervention::Soft {
        actions: vec![0.5; chain.num_actions()],
    };
    let s = simulate(&chain, &iv, &mut rng)?;
    println!("\nchain_synthetic at a = 0.5: obs = {:?}", s.obs);
    Ok(())
}
