//! Prune hard-intervention candidates to the minimal sets.

use mcbo::graph::{minimal_intervention_sets, InterventionTargets};
use mcbo::scm::make_task;

fn show(sets: &[InterventionTargets]) -> String {
    sets.iter()
        .map(|s| format!("{:?}", s.0))
        .collect::<Vec<_>>()
        .join(" ")
}

fn main() -> mcbo::Result<()> {
    for name in ["toygraph", "psagraph"] {
        let scm = make_task(name, false, 0)?;
        let hard = scm.hard().expect("hard task");
        println!("{name}");
        println!("  candidates: {}", show(&hard.candidates));
        println!("  minimal:    {}", show(&minimal_intervention_sets(scm.dag(), &hard.candidates)));
    }
    Ok(())
}
