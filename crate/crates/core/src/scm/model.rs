use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mechanism::Mechanism;
use crate::error::{McboError, Result};
use crate::gp::Kernel;
use crate::graph::{minimal_intervention_sets, Dag, InterventionTargets, NodeId};

/// Per-node additive noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    None,
    Gaussian { std: Vec<f64> },
}

impl NoiseSpec {
    pub fn gaussian(std: f64, dim: usize) -> Self {
        if std == 0.0 {
            NoiseSpec::None
        } else {
            NoiseSpec::Gaussian { std: vec![std; dim] }
        }
    }

    pub fn std(&self, l: usize) -> f64 {
        match self {
            NoiseSpec::None => 0.0,
            NoiseSpec::Gaussian { std } => std[l],
        }
    }

    pub fn is_none(&self) -> bool {
        match self {
            NoiseSpec::None => true,
            NoiseSpec::Gaussian { std } => std.iter().all(|s| *s == 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScmMode {
    /// Causal BO: the reward node takes no action.
    Cbo,
    /// Function network: the reward node may read actions.
    FunctionNetwork,
}

/// Hard-intervention description of a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardSpec {
    /// Candidate target sets before pruning.
    pub candidates: Vec<InterventionTargets>,
    /// Per-node clamp box; only consulted for nodes that appear in a
    /// candidate set.
    pub value_box: Vec<(f64, f64)>,
}

/// A chosen intervention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Intervention {
    Observational,
    /// Global action vector; node `i` reads the slots listed in the DAG.
    Soft { actions: Vec<f64> },
    /// `values[k]` clamps the `k`-th target in ascending node order.
    Hard {
        targets: InterventionTargets,
        values: Vec<Vec<f64>>,
    },
}

impl Intervention {
    pub fn hard(targets: InterventionTargets, values: Vec<Vec<f64>>) -> Self {
        if targets.is_empty() {
            Intervention::Observational
        } else {
            Intervention::Hard { targets, values }
        }
    }

    /// Target set of a hard intervention; empty otherwise.
    pub fn targets(&self) -> InterventionTargets {
        match self {
            Intervention::Hard { targets, .. } => targets.clone(),
            _ => InterventionTargets::empty(),
        }
    }

    /// Clamp value of `node`, if clamped.
    pub fn clamp_of(&self, node: NodeId) -> Option<&[f64]> {
        match self {
            Intervention::Hard { targets, values } => targets
                .iter()
                .position(|t| t == node)
                .map(|k| values[k].as_slice()),
            _ => None,
        }
    }

    /// Compact JSON, as written to CSV files.
    pub fn to_compact_json(&self) -> String {
        serde_json::to_string(self).expect("intervention serializes")
    }
}

/// Observations of one system run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub obs: Vec<Vec<f64>>,
    pub reward: f64,
}

/// Structural causal model used as the ground-truth environment.
#[derive(Debug, Clone)]
pub struct Scm {
    pub name: String,
    dag: Dag,
    mechanisms: Vec<Mechanism>,
    noise: Vec<NoiseSpec>,
    action_box: Vec<(f64, f64)>,
    cardinality_limit: Option<usize>,
    mode: ScmMode,
    hard: Option<HardSpec>,
    kernels: Vec<Kernel>,
    norm_bounds: Option<Vec<f64>>,
}

/// Builder-style arguments of [`Scm::new`].
#[derive(Debug, Clone)]
pub struct ScmParts {
    pub name: String,
    pub dag: Dag,
    pub mechanisms: Vec<Mechanism>,
    pub noise: Vec<NoiseSpec>,
    pub action_box: Vec<(f64, f64)>,
    pub cardinality_limit: Option<usize>,
    pub mode: ScmMode,
    pub hard: Option<HardSpec>,
    /// Default GP kernel per node; empty means rbf(1, 1) everywhere.
    pub kernels: Vec<Kernel>,
}

impl Scm {
    pub fn new(parts: ScmParts) -> Result<Self> {
        let ScmParts {
            name,
            dag,
            mechanisms,
            noise,
            action_box,
            cardinality_limit,
            mode,
            hard,
            mut kernels,
        } = parts;
        let n = dag.num_nodes();
        if mechanisms.len() != n || noise.len() != n {
            return Err(McboError::Config(format!(
                "need one mechanism and one noise spec per node ({n})"
            )));
        }
        for (i, (m, nz)) in mechanisms.iter().zip(&noise).enumerate() {
            if m.out_dim() != dag.obs_dim(i) {
                return Err(McboError::DimMismatch {
                    expected: dag.obs_dim(i),
                    got: m.out_dim(),
                });
            }
            if let NoiseSpec::Gaussian { std } = nz {
                if std.len() != dag.obs_dim(i) || std.iter().any(|s| !(*s >= 0.0)) {
                    return Err(McboError::Config(format!("bad noise spec at node {i}")));
                }
            }
        }
        if action_box.len() != dag.num_actions() {
            return Err(McboError::Config(format!(
                "action box has {} entries, graph has {} actions",
                action_box.len(),
                dag.num_actions()
            )));
        }
        if action_box.iter().any(|(lo, hi)| !(lo <= hi)) {
            return Err(McboError::Config("action box with lo > hi".into()));
        }
        if mode == ScmMode::Cbo && dag.node(dag.reward_node()).action_dim() > 0 {
            return Err(McboError::Config(
                "the reward node cannot take actions in cbo mode".into(),
            ));
        }
        if let Some(h) = &hard {
            if h.value_box.len() != n {
                return Err(McboError::Config("hard value box needs one entry per node".into()));
            }
            if h.candidates.iter().any(|c| c.contains(dag.reward_node())) {
                return Err(McboError::HardTargetIncludesReward);
            }
        }
        if kernels.is_empty() {
            kernels = vec![Kernel::default(); n];
        }
        if kernels.len() != n {
            return Err(McboError::Config("need one kernel per node".into()));
        }
        for k in &kernels {
            k.validate()?;
        }
        Ok(Self {
            name,
            dag,
            mechanisms,
            noise,
            action_box,
            cardinality_limit,
            mode,
            hard,
            kernels,
            norm_bounds: None,
        })
    }

    pub(crate) fn with_norm_bounds(mut self, bounds: Vec<f64>) -> Self {
        self.norm_bounds = Some(bounds);
        self
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn mechanisms(&self) -> &[Mechanism] {
        &self.mechanisms
    }

    pub fn noise(&self) -> &[NoiseSpec] {
        &self.noise
    }

    pub fn action_box(&self) -> &[(f64, f64)] {
        &self.action_box
    }

    pub fn num_actions(&self) -> usize {
        self.dag.num_actions()
    }

    pub fn cardinality_limit(&self) -> Option<usize> {
        self.cardinality_limit
    }

    pub fn mode(&self) -> ScmMode {
        self.mode
    }

    pub fn hard(&self) -> Option<&HardSpec> {
        self.hard.as_ref()
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    /// RKHS norm bound of each mechanism, when known by construction.
    pub fn norm_bounds(&self) -> Option<&[f64]> {
        self.norm_bounds.as_deref()
    }

    pub fn is_noiseless(&self) -> bool {
        self.noise.iter().all(NoiseSpec::is_none)
    }

    /// Minimal target sets among the task's hard candidates.
    pub fn minimal_targets(&self) -> Vec<InterventionTargets> {
        self.hard
            .as_ref()
            .map(|h| minimal_intervention_sets(&self.dag, &h.candidates))
            .unwrap_or_default()
    }

    /// Stable text description of every part of the task, for hashing.
    pub fn describe(&self) -> String {
        let mut out = format!("task {} mode {:?}\n", self.name, self.mode);
        out += &format!("graph {}\n", serde_json::to_string(&self.dag.to_json()).unwrap_or_default());
        for (i, m) in self.mechanisms.iter().enumerate() {
            out += &format!(
                "x{i} = {} ; noise {:?} ; kernel {:?}\n",
                m.formula(),
                self.noise[i],
                self.kernels[i]
            );
        }
        out += &format!(
            "actions {:?} ; cardinality {:?} ; hard {:?}\n",
            self.action_box, self.cardinality_limit, self.hard
        );
        out
    }

    /// Checks box and cardinality limits and hard-target validity.
    pub fn validate_intervention(&self, iv: &Intervention) -> Result<()> {
        match iv {
            Intervention::Observational => Ok(()),
            Intervention::Soft { actions } => {
                if actions.len() != self.num_actions() {
                    return Err(McboError::DimMismatch {
                        expected: self.num_actions(),
                        got: actions.len(),
                    });
                }
                for (index, (&value, &(lo, hi))) in actions.iter().zip(&self.action_box).enumerate() {
                    if !(value >= lo && value <= hi) {
                        return Err(McboError::ActionOutOfBox { index, value, lo, hi });
                    }
                }
                if let Some(limit) = self.cardinality_limit {
                    let active = actions.iter().filter(|v| **v != 0.0).count();
                    if active > limit {
                        return Err(McboError::CardinalityViolated { active, limit });
                    }
                }
                Ok(())
            }
            Intervention::Hard { targets, values } => {
                if targets.contains(self.dag.reward_node()) {
                    return Err(McboError::HardTargetIncludesReward);
                }
                let hard = self.hard.as_ref().ok_or_else(|| {
                    McboError::InvalidIntervention("task has no hard interventions".into())
                })?;
                if values.len() != targets.len() {
                    return Err(McboError::InvalidIntervention(
                        "one clamp value per target required".into(),
                    ));
                }
                for (node, v) in targets.iter().zip(values) {
                    if v.len() != self.dag.obs_dim(node) {
                        return Err(McboError::DimMismatch {
                            expected: self.dag.obs_dim(node),
                            got: v.len(),
                        });
                    }
                    let (lo, hi) = hard.value_box[node];
                    if let Some(&value) = v.iter().find(|x| !(**x >= lo && **x <= hi)) {
                        return Err(McboError::ActionOutOfBox {
                            index: node,
                            value,
                            lo,
                            hi,
                        });
                    }
                }
                Ok(())
            }
        }
    }

    /// Draws one standard-normal vector per node (every node, clamped or
    /// not, so that draws line up across interventions).
    pub fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        (0..self.dag.num_nodes())
            .map(|i| (0..self.dag.obs_dim(i)).map(|_| rng.sample(StandardNormal)).collect())
            .collect()
    }

    /// Parent observations of node `i`, concatenated.
    pub fn gather_parents(&self, i: NodeId, obs: &[Vec<f64>]) -> Vec<f64> {
        self.dag
            .parents(i)
            .iter()
            .flat_map(|&p| obs[p].iter().copied())
            .collect()
    }

    /// Actions read by node `i` from the global vector.
    pub fn gather_actions(&self, i: NodeId, actions: &[f64]) -> Vec<f64> {
        self.dag.node(i).actions.iter().map(|&k| actions[k]).collect()
    }

    /// Runs the system with given standard-normal draws, which are scaled
    /// by each node's noise level. Clamped nodes ignore their draws.
    pub fn simulate_with_noise(&self, iv: &Intervention, std_normal: &[Vec<f64>]) -> Result<Sample> {
        self.validate_intervention(iv)?;
        let zeros = vec![0.0; self.num_actions()];
        let actions = match iv {
            Intervention::Soft { actions } => actions.as_slice(),
            _ => zeros.as_slice(),
        };
        let n = self.dag.num_nodes();
        let mut obs: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            if let Some(v) = iv.clamp_of(i) {
                obs.push(v.to_vec());
                continue;
            }
            let z = self.gather_parents(i, &obs);
            let a = self.gather_actions(i, actions);
            let mut x = self.mechanisms[i].eval(&z, &a);
            for (l, xl) in x.iter_mut().enumerate() {
                *xl += self.noise[i].std(l) * std_normal[i][l];
            }
            obs.push(x);
        }
        let reward = obs[n - 1][0];
        Ok(Sample { obs, reward })
    }
}

/// One draw from the system under `iv`.
pub fn simulate<R: Rng + ?Sized>(scm: &Scm, iv: &Intervention, rng: &mut R) -> Result<Sample> {
    let noise = scm.draw_noise(rng);
    scm.simulate_with_noise(iv, &noise)
}

/// Monte-Carlo estimate of `E[y | iv]`; a single rollout when the system
/// is noiseless.
pub fn expected_reward<R: Rng + ?Sized>(
    scm: &Scm,
    iv: &Intervention,
    n_mc: usize,
    rng: &mut R,
) -> Result<f64> {
    if scm.is_noiseless() {
        let zero: Vec<Vec<f64>> = (0..scm.dag().num_nodes())
            .map(|i| vec![0.0; scm.dag().obs_dim(i)])
            .collect();
        return Ok(scm.simulate_with_noise(iv, &zero)?.reward);
    }
    let n_mc = n_mc.max(1);
    let mut total = 0.0;
    for _ in 0..n_mc {
        total += simulate(scm, iv, rng)?.reward;
    }
    Ok(total / n_mc as f64)
}
