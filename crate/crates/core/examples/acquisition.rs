//! Evaluate and optimize the optimistic acquisition on a soft task.

use mcbo::acquisition::{constant_etas, optimize_acq, AcqConfig, CausalStructure, PlausibleModel};
use mcbo::engine::{init_data, InitProtocol};
use mcbo::gp::fit;
use mcbo::scm::{make_task, Intervention};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> mcbo::Result<()> {
    let scm = make_task("chain_synthetic", true, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let init = init_data(&scm, &InitProtocol::default(), &mut rng)?;
    let dag = scm.dag();
    let posteriors = init
        .datasets
        .into_iter()
        .enumerate()
        .map(|(i, d)| fit(scm.kernels()[i], d, dag.input_dim(i), dag.obs_dim(i)))
        .collect::<mcbo::Result<Vec<_>>>()?;

    let structure = CausalStructure::from_scm(&scm);
    let beta = 1.0;
    let model = PlausibleModel::new(&structure, &posteriors, beta)?;
    let draws = structure.draws(64, &mut rng);
    let iv = Intervention::Soft {
        actions: vec![0.0; scm.num_actions()],
    };
    for eta in [-1.0, 0.0, 1.0] {
        let g = model.value_and_grad(&constant_etas(dag, eta), &iv, &draws)?;
        println!("eta = {eta:>4}: value {:.4}, d/da {:?}", g.value, g.actions);
    }

    let best = optimize_acq(&structure, &posteriors, beta, &AcqConfig::default(), &mut rng)?;
    println!("chosen intervention {}", best.intervention.to_compact_json());
    println!("acquisition value   {:.4}", best.value);
    Ok(())
}
