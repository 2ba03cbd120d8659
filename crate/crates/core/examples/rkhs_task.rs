//! Draw a chain task from an RKHS ball and check the confidence bounds.

use mcbo::engine::node_noise_vars;
use mcbo::gp::{fit, GpDataset, Kernel};
use mcbo::graph::Dag;
use mcbo::scm::{make_rkhs_task, simulate, Intervention, RkhsParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> mcbo::Result<()> {
    let dag = Dag::chain(3, &[1, 1, 0])?;
    let params = RkhsParams {
        kernel: Kernel::rbf(0.5, 1.0),
        norm_bound: 2.0,
        z_box: (-2.0, 2.0),
        noise_std: 0.1,
        ..RkhsParams::default()
    };
    let scm = make_rkhs_task(&dag, &params, 5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let noise = node_noise_vars(&scm);
    let mut data: Vec<GpDataset> = noise.iter().map(|&v| GpDataset::new(v)).collect();
    for _ in 0..25 {
        let actions: Vec<f64> = (0..scm.num_actions()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = simulate(&scm, &Intervention::Soft { actions: actions.clone() }, &mut rng)?;
        for (i, d) in data.iter_mut().enumerate() {
            let mut x = scm.gather_parents(i, &s.obs);
            x.extend(scm.gather_actions(i, &actions));
            d.push(x, s.obs[i].clone());
        }
    }
    let beta = 3.0;
    for (i, d) in data.into_iter().enumerate() {
        let gp = fit(params.kernel, d, dag.input_dim(i), dag.obs_dim(i))?;
        let mut inside = 0;
        for _ in 0..200 {
            let z: Vec<f64> = (0..dag.parent_dim(i)).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let a: Vec<f64> = (0..dag.node(i).action_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let truth = scm.mechanisms()[i].eval(&z, &a)[0];
            let s: Vec<f64> = z.iter().chain(&a).copied().collect();
            let (lo, hi) = gp.confidence_bounds(&s, beta)?;
            inside += usize::from(lo[0] <= truth && truth <= hi[0]);
        }
        println!("node {i}: {inside}/200 probes inside the beta = {beta} band");
    }
    Ok(())
}
