//! Reparameterized rollouts through the plausible model and their exact
//! gradients.

use rand::Rng;
use rand_distr::StandardNormal;

use super::eta::EtaParam;
use crate::error::{McboError, Result};
use crate::gp::GpPosterior;
use crate::graph::{Dag, InterventionTargets, NodeId};
use crate::scm::{HardSpec, Intervention, NoiseSpec, Sample, Scm};

/// What the agent knows about the system: graph, noise law, action
/// constraints and the hard-intervention menu. Mechanisms are withheld.
#[derive(Debug, Clone)]
pub struct CausalStructure {
    pub dag: Dag,
    pub noise: Vec<NoiseSpec>,
    pub action_box: Vec<(f64, f64)>,
    pub cardinality_limit: Option<usize>,
    pub hard: Option<HardSpec>,
    /// Pruned hard target sets; empty for soft tasks.
    pub minimal_targets: Vec<InterventionTargets>,
}

impl CausalStructure {
    pub fn from_scm(scm: &Scm) -> Self {
        Self {
            dag: scm.dag().clone(),
            noise: scm.noise().to_vec(),
            action_box: scm.action_box().to_vec(),
            cardinality_limit: scm.cardinality_limit(),
            hard: scm.hard().cloned(),
            minimal_targets: scm.minimal_targets(),
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise.iter().all(|n| n.is_none())
    }

    /// One all-zero draw per node.
    pub fn zero_draw(&self) -> Vec<Vec<f64>> {
        (0..self.dag.num_nodes())
            .map(|i| vec![0.0; self.dag.obs_dim(i)])
            .collect()
    }

    /// `n` standard-normal draws, or a single zero draw if noiseless.
    pub fn draws<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<Vec<f64>>> {
        if self.is_noiseless() {
            return vec![self.zero_draw()];
        }
        (0..n.max(1))
            .map(|_| {
                (0..self.dag.num_nodes())
                    .map(|i| {
                        (0..self.dag.obs_dim(i))
                            .map(|_| rng.sample(StandardNormal))
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Per-node posteriors plus the exploration weight.
#[derive(Debug, Clone, Copy)]
pub struct PlausibleModel<'a> {
    pub structure: &'a CausalStructure,
    pub posteriors: &'a [GpPosterior],
    pub beta: f64,
}

/// Gradient of the averaged rollout reward.
#[derive(Debug, Clone, PartialEq)]
pub struct AcqGradient {
    pub value: f64,
    /// With respect to the global action vector.
    pub actions: Vec<f64>,
    /// With respect to clamp values, one vector per target in node order.
    pub clamps: Vec<Vec<f64>>,
    /// With respect to each node's `eta` parameters.
    pub etas: Vec<Vec<f64>>,
}

struct NodeTape {
    input: Vec<f64>,
    std: Vec<f64>,
    eta: Vec<f64>,
    dmean: Vec<f64>,
    dstd: Vec<f64>,
}

impl<'a> PlausibleModel<'a> {
    pub fn new(structure: &'a CausalStructure, posteriors: &'a [GpPosterior], beta: f64) -> Result<Self> {
        let dag = &structure.dag;
        if posteriors.len() != dag.num_nodes() {
            return Err(McboError::LengthMismatch(posteriors.len(), dag.num_nodes()));
        }
        for (i, gp) in posteriors.iter().enumerate() {
            if gp.input_dim() != dag.input_dim(i) {
                return Err(McboError::DimMismatch {
                    expected: dag.input_dim(i),
                    got: gp.input_dim(),
                });
            }
            if gp.out_dim() != dag.obs_dim(i) {
                return Err(McboError::DimMismatch {
                    expected: dag.obs_dim(i),
                    got: gp.out_dim(),
                });
            }
        }
        Ok(Self {
            structure,
            posteriors,
            beta,
        })
    }

    fn actions_of<'b>(&self, iv: &'b Intervention, zeros: &'b [f64]) -> Result<&'b [f64]> {
        match iv {
            Intervention::Soft { actions } => {
                if actions.len() != self.structure.dag.num_actions() {
                    return Err(McboError::DimMismatch {
                        expected: self.structure.dag.num_actions(),
                        got: actions.len(),
                    });
                }
                Ok(actions)
            }
            _ => Ok(zeros),
        }
    }

    fn check_etas(&self, etas: &[EtaParam]) -> Result<()> {
        let dag = &self.structure.dag;
        if etas.len() != dag.num_nodes() {
            return Err(McboError::LengthMismatch(etas.len(), dag.num_nodes()));
        }
        for (i, e) in etas.iter().enumerate() {
            if e.out_dim() != dag.obs_dim(i) {
                return Err(McboError::DimMismatch {
                    expected: dag.obs_dim(i),
                    got: e.out_dim(),
                });
            }
        }
        Ok(())
    }

    fn forward(
        &self,
        etas: &[EtaParam],
        iv: &Intervention,
        std_normal: &[Vec<f64>],
        mut tape: Option<&mut Vec<Option<NodeTape>>>,
    ) -> Result<Sample> {
        let dag = &self.structure.dag;
        let zeros = vec![0.0; dag.num_actions()];
        let actions = self.actions_of(iv, &zeros)?;
        let n = dag.num_nodes();
        let mut obs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            if let Some(v) = iv.clamp_of(i) {
                obs.push(v.to_vec());
                if let Some(t) = tape.as_deref_mut() {
                    t.push(None);
                }
                continue;
            }
            let mut s: Vec<f64> = dag.parents(i).iter().flat_map(|&p| obs[p].iter().copied()).collect();
            s.extend(dag.node(i).actions.iter().map(|&k| actions[k]));
            let eta = etas[i].eval(&s);
            let x: Vec<f64>;
            if let Some(t) = tape.as_deref_mut() {
                let (mean, std, jac) = self.posteriors[i].moments(&s)?;
                x = (0..mean.len())
                    .map(|l| {
                        mean[l] + self.beta * std[l] * eta[l] + self.structure.noise[i].std(l) * std_normal[i][l]
                    })
                    .collect();
                t.push(Some(NodeTape {
                    input: s,
                    std,
                    eta,
                    dmean: jac.dmean,
                    dstd: jac.dstd,
                }));
            } else {
                let mean = self.posteriors[i].mean(&s)?;
                let var = self.posteriors[i].var(&s)?;
                x = (0..mean.len())
                    .map(|l| {
                        mean[l]
                            + self.beta * var[l].sqrt() * eta[l]
                            + self.structure.noise[i].std(l) * std_normal[i][l]
                    })
                    .collect();
            }
            obs.push(x);
        }
        let reward = obs[n - 1][0];
        Ok(Sample { obs, reward })
    }

    /// One rollout of `x_i = mu_i + beta sigma_i eta_i + noise_i` with the
    /// given standard-normal draws.
    pub fn rollout(&self, etas: &[EtaParam], iv: &Intervention, std_normal: &[Vec<f64>]) -> Result<Sample> {
        self.check_etas(etas)?;
        self.forward(etas, iv, std_normal, None)
    }

    /// Average reward over the draws.
    pub fn value(&self, etas: &[EtaParam], iv: &Intervention, draws: &[Vec<Vec<f64>>]) -> Result<f64> {
        self.check_etas(etas)?;
        let mut total = 0.0;
        for d in draws {
            total += self.forward(etas, iv, d, None)?.reward;
        }
        Ok(total / draws.len().max(1) as f64)
    }

    /// Average reward and its gradient by a reverse pass through each
    /// rollout.
    pub fn value_and_grad(
        &self,
        etas: &[EtaParam],
        iv: &Intervention,
        draws: &[Vec<Vec<f64>>],
    ) -> Result<AcqGradient> {
        self.check_etas(etas)?;
        let dag = &self.structure.dag;
        let n = dag.num_nodes();
        let targets = iv.targets();
        let mut out = AcqGradient {
            value: 0.0,
            actions: vec![0.0; dag.num_actions()],
            clamps: targets.iter().map(|t| vec![0.0; dag.obs_dim(t)]).collect(),
            etas: etas.iter().map(|e| vec![0.0; e.num_params()]).collect(),
        };
        let w = 1.0 / draws.len().max(1) as f64;
        let mut tape: Vec<Option<NodeTape>> = Vec::with_capacity(n);
        for d in draws {
            tape.clear();
            out.value += w * self.forward(etas, iv, d, Some(&mut tape))?.reward;
            let mut adj: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; dag.obs_dim(i)]).collect();
            adj[n - 1][0] = w;
            for i in (0..n).rev() {
                let u = std::mem::take(&mut adj[i]);
                let Some(t) = &tape[i] else {
                    let k = targets.iter().position(|x| x == i).expect("clamped node is a target");
                    out.clamps[k].iter_mut().zip(&u).for_each(|(g, u)| *g += u);
                    continue;
                };
                let p = t.input.len();
                let mut gs = vec![0.0; p];
                let mut u_eta = vec![0.0; u.len()];
                for (l, ul) in u.iter().enumerate() {
                    if *ul == 0.0 {
                        continue;
                    }
                    let c = self.beta * t.eta[l];
                    for j in 0..p {
                        gs[j] += ul * (t.dmean[l * p + j] + c * t.dstd[l * p + j]);
                    }
                    u_eta[l] = self.beta * ul * t.std[l];
                }
                let (gs_eta, g_theta) = etas[i].vjp(&t.input, &u_eta);
                gs.iter_mut().zip(&gs_eta).for_each(|(g, e)| *g += e);
                out.etas[i].iter_mut().zip(&g_theta).for_each(|(g, e)| *g += e);
                let mut off = 0;
                for &par in dag.parents(i) {
                    let dim = dag.obs_dim(par);
                    adj[par].iter_mut().zip(&gs[off..off + dim]).for_each(|(a, g)| *a += g);
                    off += dim;
                }
                for (k, &slot) in dag.node(i).actions.iter().enumerate() {
                    out.actions[slot] += gs[off + k];
                }
            }
        }
        Ok(out)
    }
}

/// Single reparameterized rollout.
pub fn reparam_rollout(
    model: &PlausibleModel<'_>,
    etas: &[EtaParam],
    iv: &Intervention,
    std_normal: &[Vec<f64>],
) -> Result<Sample> {
    model.rollout(etas, iv, std_normal)
}

/// Monte-Carlo acquisition value over fixed draws.
pub fn acq_value(
    model: &PlausibleModel<'_>,
    etas: &[EtaParam],
    iv: &Intervention,
    draws: &[Vec<Vec<f64>>],
) -> Result<f64> {
    model.value(etas, iv, draws)
}

/// Acquisition value and its gradient over fixed draws.
pub fn acq_grad(
    model: &PlausibleModel<'_>,
    etas: &[EtaParam],
    iv: &Intervention,
    draws: &[Vec<Vec<f64>>],
) -> Result<AcqGradient> {
    model.value_and_grad(etas, iv, draws)
}

/// Constant `eta = value` at every node.
pub fn constant_etas(dag: &Dag, value: f64) -> Vec<EtaParam> {
    (0..dag.num_nodes())
        .map(|i| EtaParam::constant(vec![value; dag.obs_dim(i)]))
        .collect()
}

/// Prior posteriors for every node under the given kernels and noise.
pub fn prior_posteriors(dag: &Dag, kernels: &[crate::gp::Kernel], noise_var: &[f64]) -> Vec<GpPosterior> {
    (0..dag.num_nodes())
        .map(|i: NodeId| {
            GpPosterior::prior(
                kernels.get(i).copied().unwrap_or_default(),
                dag.input_dim(i),
                dag.obs_dim(i),
                noise_var.get(i).copied().unwrap_or(1e-6),
            )
        })
        .collect()
}
