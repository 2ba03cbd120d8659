use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mechanism::Mechanism;
use super::model::{NoiseSpec, Scm, ScmMode, ScmParts};
use crate::error::Result;
use crate::gp::Kernel;
use crate::graph::Dag;

/// Finite kernel expansion `f_l(s) = sum_j coeffs[l][j] k(s, centers[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkhsFunction {
    pub kernel: Kernel,
    pub centers: Vec<Vec<f64>>,
    /// One coefficient vector per output component.
    pub coeffs: Vec<Vec<f64>>,
}

impl RkhsFunction {
    pub fn eval(&self, s: &[f64]) -> Vec<f64> {
        let k: Vec<f64> = self.centers.iter().map(|c| self.kernel.base(c, s)).collect();
        self.coeffs
            .iter()
            .map(|alpha| alpha.iter().zip(&k).map(|(a, k)| a * k).sum())
            .collect()
    }

    /// `sqrt(alpha^T K alpha)` per output component.
    pub fn norms(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|alpha| {
                let mut q = 0.0;
                for (i, ci) in self.centers.iter().enumerate() {
                    for (j, cj) in self.centers.iter().enumerate() {
                        q += alpha[i] * alpha[j] * self.kernel.base(ci, cj);
                    }
                }
                q.max(0.0).sqrt()
            })
            .collect()
    }
}

/// Parameters of [`make_rkhs_task`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkhsParams {
    pub kernel: Kernel,
    pub n_centers: usize,
    /// RKHS norm of every drawn output component.
    pub norm_bound: f64,
    pub action_box: (f64, f64),
    /// Box for parent observations when placing centers.
    pub z_box: (f64, f64),
    pub noise_std: f64,
    pub mode: ScmMode,
}

impl Default for RkhsParams {
    fn default() -> Self {
        Self {
            kernel: Kernel::rbf(1.0, 1.0),
            n_centers: 8,
            norm_bound: 1.0,
            action_box: (-1.0, 1.0),
            z_box: (-1.0, 1.0),
            noise_std: 0.0,
            mode: ScmMode::Cbo,
        }
    }
}

/// Draws every mechanism as a random kernel expansion whose RKHS norm is
/// exactly `norm_bound` per output component. The task's GP kernels are
/// set to the generating kernel.
pub fn make_rkhs_task(dag: &Dag, params: &RkhsParams, seed: u64) -> Result<Scm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = dag.num_nodes();
    let mut mechanisms = Vec::with_capacity(n);
    for i in 0..n {
        let pdim = dag.parent_dim(i);
        let qdim = dag.node(i).action_dim();
        let centers: Vec<Vec<f64>> = (0..params.n_centers)
            .map(|_| {
                let mut c: Vec<f64> = (0..pdim)
                    .map(|_| rng.gen_range(params.z_box.0..=params.z_box.1))
                    .collect();
                c.extend((0..qdim).map(|_| rng.gen_range(params.action_box.0..=params.action_box.1)));
                c
            })
            .collect();
        let mut f = RkhsFunction {
            kernel: params.kernel,
            coeffs: (0..dag.obs_dim(i))
                .map(|_| (0..params.n_centers).map(|_| rng.sample(StandardNormal)).collect())
                .collect(),
            centers,
        };
        let norms = f.norms();
        for (alpha, norm) in f.coeffs.iter_mut().zip(norms) {
            let scale = if norm > 0.0 { params.norm_bound / norm } else { 0.0 };
            alpha.iter_mut().for_each(|a| *a *= scale);
        }
        let formula = format!("rkhs {}", serde_json::to_string(&f).unwrap_or_default());
        mechanisms.push(Mechanism::new(formula, dag.obs_dim(i), move |z, a| {
            let s: Vec<f64> = z.iter().chain(a).copied().collect();
            f.eval(&s)
        }));
    }
    let noise = (0..n)
        .map(|i| NoiseSpec::gaussian(params.noise_std, dag.obs_dim(i)))
        .collect();
    let scm = Scm::new(ScmParts {
        name: format!("rkhs_{seed}"),
        dag: dag.clone(),
        mechanisms,
        noise,
        action_box: vec![params.action_box; dag.num_actions()],
        cardinality_limit: None,
        mode: params.mode,
        hard: None,
        kernels: vec![params.kernel; n],
    })?;
    Ok(scm.with_norm_bounds(vec![params.norm_bound; n]))
}
