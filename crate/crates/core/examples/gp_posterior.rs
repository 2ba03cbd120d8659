//! Fit a GP to noisy samples of `sin` and print the posterior band.

use mcbo::gp::{fit, info_gain, GpDataset, GpPosterior, Kernel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> mcbo::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise_var = 0.01;
    let mut data = GpDataset::new(noise_var);
    // posterior variance at each point just before it is added
    let mut trace = Vec::new();
    for _ in 0..12 {
        let x: f64 = rng.gen_range(-3.0..3.0);
        let gp = fit(Kernel::rbf(1.0, 1.0), data.clone(), 1, 1)?;
        trace.push(gp.var(&[x])?);
        let y = x.sin() + noise_var.sqrt() * rng.sample::<f64, _>(StandardNormal);
        data.push(vec![x], vec![y]);
    }
    let gp: GpPosterior = fit(Kernel::rbf(1.0, 1.0), data, 1, 1)?;

    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "x", "sin(x)", "mean", "lower", "upper");
    for k in 0..=12 {
        let x = -3.0 + 0.5 * k as f64;
        let mean = gp.mean(&[x])?[0];
        let (lo, hi) = gp.confidence_bounds(&[x], 2.0)?;
        println!("{x:>6.2} {:>9.4} {mean:>9.4} {:>9.4} {:>9.4}", x.sin(), lo[0], hi[0]);
    }
    println!("realized information gain after 12 points: {:.3}", info_gain(&trace, noise_var));
    Ok(())
}
