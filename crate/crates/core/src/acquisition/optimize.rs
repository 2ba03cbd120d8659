//! Multi-start projected gradient ascent over actions (or clamp values)
//! and `eta` parameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eta::{EtaNet, EtaParam, InputScaling};
use super::model::PlausibleModel;
use crate::error::{McboError, Result};
use crate::gp::GpPosterior;
use crate::graph::InterventionTargets;
use crate::scm::{combinations, Intervention};

/// Which `eta` family to optimize over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EtaKind {
    /// Constants for noiseless structures, networks otherwise.
    #[default]
    Auto,
    Constant,
    Net,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcqConfig {
    /// Noise draws per acquisition estimate.
    pub n_mc: usize,
    pub restarts: usize,
    pub grad_steps: usize,
    /// Adam step size in normalized coordinates.
    pub step_size: f64,
    /// Random candidates screened before choosing restarts.
    pub raw_candidates: usize,
    pub hidden: usize,
    pub eta: EtaKind,
    /// Exhaustive support enumeration up to this many supports.
    pub max_supports: usize,
    /// Base seed mixed into every per-round acquisition stream.
    pub seed: u64,
}

impl Default for AcqConfig {
    fn default() -> Self {
        Self {
            n_mc: 32,
            restarts: 10,
            grad_steps: 100,
            step_size: 0.05,
            raw_candidates: 100,
            hidden: 32,
            eta: EtaKind::Auto,
            max_supports: 512,
            seed: 0,
        }
    }
}

/// Best point found by [`optimize_acq`].
#[derive(Debug, Clone, PartialEq)]
pub struct AcqResult {
    pub intervention: Intervention,
    pub etas: Vec<EtaParam>,
    /// Acquisition value on the common scoring draws.
    pub value: f64,
}

/// A smooth objective on a box-like domain.
pub trait Objective: Sync {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    fn project(&self, theta: &mut [f64]);
    /// Common score used to rank candidates and restarts.
    fn score(&self, theta: &[f64]) -> Result<f64>;
    /// Value and gradient used while ascending from restart `r`.
    fn value_and_grad(&self, theta: &[f64], restart: usize) -> Result<(f64, Vec<f64>)>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentConfig {
    pub raw_candidates: usize,
    pub restarts: usize,
    pub grad_steps: usize,
    pub step_size: f64,
}

impl From<&AcqConfig> for AscentConfig {
    fn from(c: &AcqConfig) -> Self {
        Self {
            raw_candidates: c.raw_candidates,
            restarts: c.restarts,
            grad_steps: c.grad_steps,
            step_size: c.step_size,
        }
    }
}

/// Adam ascent from one start with a step size decaying geometrically to
/// 1% of its initial value. Returns the best iterate seen.
fn ascend<O: Objective>(obj: &O, start: Vec<f64>, restart: usize, cfg: &AscentConfig) -> Result<Vec<f64>> {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let dim = start.len();
    let mut theta = start;
    let mut m = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    let mut best = (f64::NEG_INFINITY, theta.clone());
    for t in 0..=cfg.grad_steps {
        let (val, g) = obj.value_and_grad(&theta, restart)?;
        if val > best.0 {
            best = (val, theta.clone());
        }
        if t == cfg.grad_steps || dim == 0 {
            break;
        }
        let k = (t + 1) as i32;
        let lr = cfg.step_size * 0.01f64.powf(t as f64 / cfg.grad_steps as f64);
        for j in 0..dim {
            m[j] = B1 * m[j] + (1.0 - B1) * g[j];
            v[j] = B2 * v[j] + (1.0 - B2) * g[j] * g[j];
            let mh = m[j] / (1.0 - B1.powi(k));
            let vh = v[j] / (1.0 - B2.powi(k));
            theta[j] += lr * mh / (vh.sqrt() + EPS);
        }
        obj.project(&mut theta);
    }
    Ok(best.1)
}

/// Screens random candidates, ascends from the best `restarts` of them in
/// parallel and returns the point with the highest score.
pub fn multistart_ascent<O: Objective>(obj: &O, cfg: &AscentConfig, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, f64)> {
    let n_raw = cfg.raw_candidates.max(cfg.restarts).max(1);
    let mut scored = Vec::with_capacity(n_raw);
    for _ in 0..n_raw {
        let mut th = obj.sample(rng);
        obj.project(&mut th);
        let s = obj.score(&th)?;
        scored.push((s, th));
    }
    // stable: ties keep generation order
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let starts: Vec<Vec<f64>> = scored
        .into_iter()
        .take(cfg.restarts.max(1))
        .map(|(_, t)| t)
        .collect();
    let finals: Vec<Result<(f64, Vec<f64>)>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(r, th)| {
            let th = ascend(obj, th, r, cfg)?;
            Ok((obj.score(&th)?, th))
        })
        .collect();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for f in finals {
        let (s, th) = f?;
        if best.as_ref().is_none_or(|b| s > b.0) {
            best = Some((s, th));
        }
    }
    let (s, th) = best.ok_or(McboError::NoFeasibleCandidate)?;
    Ok((th, s))
}

/// Decision block: which coordinates the optimizer may move.
#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    /// Action indices free to move; all others stay at zero.
    Support(Vec<usize>),
    /// Hard intervention on these targets.
    Targets(InterventionTargets),
}

/// Acquisition as a function of packed `[normalized decision, eta params]`.
pub struct AcqObjective<'a> {
    model: PlausibleModel<'a>,
    block: Block,
    /// Box per decision coordinate.
    bounds: Vec<(f64, f64)>,
    templates: Vec<EtaParam>,
    eta_offsets: Vec<usize>,
    dim: usize,
    score_draws: Vec<Vec<Vec<f64>>>,
    restart_draws: Vec<Vec<Vec<Vec<f64>>>>,
}

fn eta_templates(model: &PlausibleModel<'_>, kind: EtaKind, hidden: usize) -> Vec<EtaParam> {
    let dag = &model.structure.dag;
    let net = match kind {
        EtaKind::Auto => !model.structure.is_noiseless(),
        EtaKind::Constant => false,
        EtaKind::Net => true,
    };
    (0..dag.num_nodes())
        .map(|i| {
            if net {
                let p = dag.input_dim(i);
                let sc = InputScaling::from_data(&model.posteriors[i].data().inputs, p);
                EtaParam::TwoLayerNet(EtaNet::zeros(p, hidden, dag.obs_dim(i), sc))
            } else {
                EtaParam::constant(vec![0.0; dag.obs_dim(i)])
            }
        })
        .collect()
}

impl<'a> AcqObjective<'a> {
    pub fn new(model: PlausibleModel<'a>, block: Block, cfg: &AcqConfig, rng: &mut ChaCha8Rng) -> Result<Self> {
        let st = model.structure;
        let bounds: Vec<(f64, f64)> = match &block {
            Block::Support(sup) => {
                for &k in sup {
                    if k >= st.action_box.len() {
                        return Err(McboError::InvalidIntervention(format!("action {k} out of range")));
                    }
                }
                if sup.len() < st.dag.num_actions()
                    && (0..st.dag.num_actions())
                        .filter(|k| !sup.contains(k))
                        .any(|k| !(st.action_box[k].0 <= 0.0 && 0.0 <= st.action_box[k].1))
                {
                    return Err(McboError::NoFeasibleCandidate);
                }
                sup.iter().map(|&k| st.action_box[k]).collect()
            }
            Block::Targets(t) => {
                let hard = st.hard.as_ref().ok_or_else(|| {
                    McboError::InvalidIntervention("task has no hard interventions".into())
                })?;
                t.iter()
                    .flat_map(|node| std::iter::repeat_n(hard.value_box[node], st.dag.obs_dim(node)))
                    .collect()
            }
        };
        let templates = eta_templates(&model, cfg.eta, cfg.hidden);
        let mut eta_offsets = Vec::with_capacity(templates.len());
        let mut dim = bounds.len();
        for t in &templates {
            eta_offsets.push(dim);
            dim += t.num_params();
        }
        let score_draws = st.draws(cfg.n_mc, rng);
        let restart_draws = (0..cfg.restarts.max(1)).map(|_| st.draws(cfg.n_mc, rng)).collect();
        Ok(Self {
            model,
            block,
            bounds,
            templates,
            eta_offsets,
            dim,
            score_draws,
            restart_draws,
        })
    }

    /// Intervention and `eta` functions encoded by `theta`.
    pub fn decode(&self, theta: &[f64]) -> (Intervention, Vec<EtaParam>) {
        let x: Vec<f64> = self
            .bounds
            .iter()
            .zip(theta)
            .map(|((lo, hi), u)| lo + u * (hi - lo))
            .collect();
        let iv = match &self.block {
            Block::Support(sup) => {
                let mut a = vec![0.0; self.model.structure.dag.num_actions()];
                for (k, &slot) in sup.iter().enumerate() {
                    a[slot] = x[k];
                }
                Intervention::Soft { actions: a }
            }
            Block::Targets(t) => {
                let mut off = 0;
                let mut values = Vec::with_capacity(t.len());
                for node in t.iter() {
                    let d = self.model.structure.dag.obs_dim(node);
                    values.push(x[off..off + d].to_vec());
                    off += d;
                }
                Intervention::hard(t.clone(), values)
            }
        };
        let etas = self
            .templates
            .iter()
            .zip(&self.eta_offsets)
            .map(|(t, &off)| {
                let mut e = t.clone();
                e.set_params(&theta[off..off + t.num_params()]);
                e
            })
            .collect();
        (iv, etas)
    }
}

impl Objective for AcqObjective<'_> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut th: Vec<f64> = (0..self.bounds.len()).map(|_| rng.gen::<f64>()).collect();
        let dag = &self.model.structure.dag;
        for (i, t) in self.templates.iter().enumerate() {
            match t {
                EtaParam::Constant { value } => {
                    th.extend((0..value.len()).map(|_| rng.gen_range(-1.0..=1.0)));
                }
                EtaParam::TwoLayerNet(net) => {
                    let r = EtaNet::random(net.in_dim, net.hidden, dag.obs_dim(i), net.scaling.clone(), rng);
                    th.extend(r.params());
                }
            }
        }
        th
    }

    fn project(&self, theta: &mut [f64]) {
        let nb = self.bounds.len();
        theta[..nb].iter_mut().for_each(|u| *u = u.clamp(0.0, 1.0));
        for (t, &off) in self.templates.iter().zip(&self.eta_offsets) {
            t.project(&mut theta[off..off + t.num_params()]);
        }
    }

    fn score(&self, theta: &[f64]) -> Result<f64> {
        let (iv, etas) = self.decode(theta);
        self.model.value(&etas, &iv, &self.score_draws)
    }

    fn value_and_grad(&self, theta: &[f64], restart: usize) -> Result<(f64, Vec<f64>)> {
        let (iv, etas) = self.decode(theta);
        let draws = &self.restart_draws[restart % self.restart_draws.len()];
        let g = self.model.value_and_grad(&etas, &iv, draws)?;
        let mut out = vec![0.0; self.dim];
        let raw: Vec<f64> = match &self.block {
            Block::Support(sup) => sup.iter().map(|&k| g.actions[k]).collect(),
            Block::Targets(_) => g.clamps.concat(),
        };
        for (k, ((lo, hi), gr)) in self.bounds.iter().zip(&raw).enumerate() {
            out[k] = gr * (hi - lo);
        }
        for (ge, &off) in g.etas.iter().zip(&self.eta_offsets) {
            out[off..off + ge.len()].copy_from_slice(ge);
        }
        Ok((g.value, out))
    }
}

/// Maximizes the acquisition over one block.
pub fn optimize_block(
    model: PlausibleModel<'_>,
    block: Block,
    cfg: &AcqConfig,
    rng: &mut ChaCha8Rng,
) -> Result<AcqResult> {
    let obj = AcqObjective::new(model, block, cfg, rng)?;
    let (theta, value) = multistart_ascent(&obj, &cfg.into(), rng)?;
    let (intervention, etas) = obj.decode(&theta);
    Ok(AcqResult {
        intervention,
        etas,
        value,
    })
}

/// Candidate supports under a cardinality limit: every size-`c` subset
/// when there are at most `max_supports`, otherwise `None`.
pub fn enumerate_supports(num_actions: usize, limit: Option<usize>, max_supports: usize) -> Option<Vec<Vec<usize>>> {
    match limit {
        Some(c) if c < num_actions => {
            let count = binomial(num_actions, c);
            (count <= max_supports as u128).then(|| combinations(num_actions, c))
        }
        _ => Some(vec![(0..num_actions).collect()]),
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n.saturating_sub(k));
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Greedy support: ranks single actions by a short optimization and keeps
/// the best `c`.
fn greedy_support(model: PlausibleModel<'_>, c: usize, cfg: &AcqConfig, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let short = AcqConfig {
        restarts: 1,
        raw_candidates: (cfg.raw_candidates / 4).max(1),
        grad_steps: (cfg.grad_steps / 4).max(1),
        ..cfg.clone()
    };
    let mut ranked = Vec::new();
    for k in 0..model.structure.dag.num_actions() {
        let r = optimize_block(model, Block::Support(vec![k]), &short, rng)?;
        ranked.push((r.value, k));
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut sup: Vec<usize> = ranked.into_iter().take(c).map(|(_, k)| k).collect();
    sup.sort_unstable();
    Ok(sup)
}

fn best_of(results: Vec<AcqResult>) -> Result<AcqResult> {
    let mut best: Option<AcqResult> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    best.ok_or(McboError::NoFeasibleCandidate)
}

/// Jointly maximizes the acquisition over interventions and `eta`.
///
/// Hard-intervention structures are optimized per minimal target set;
/// soft ones per action support.
pub fn optimize_acq(
    structure: &crate::acquisition::CausalStructure,
    posteriors: &[GpPosterior],
    beta: f64,
    cfg: &AcqConfig,
    rng: &mut ChaCha8Rng,
) -> Result<AcqResult> {
    let model = PlausibleModel::new(structure, posteriors, beta)?;
    let blocks: Vec<Block> = if structure.hard.is_some() {
        structure.minimal_targets.iter().cloned().map(Block::Targets).collect()
    } else {
        let a = structure.dag.num_actions();
        match enumerate_supports(a, structure.cardinality_limit, cfg.max_supports) {
            Some(sups) => sups.into_iter().map(Block::Support).collect(),
            None => {
                let c = structure.cardinality_limit.unwrap_or(a);
                vec![Block::Support(greedy_support(model, c, cfg, rng)?)]
            }
        }
    };
    let mut results = Vec::with_capacity(blocks.len());
    for b in blocks {
        let mut sub = ChaCha8Rng::seed_from_u64(rng.gen());
        results.push(optimize_block(model, b, cfg, &mut sub)?);
    }
    best_of(results)
}

/// Upper confidence bound `mu + beta sigma` of a single GP over the
/// global action vector.
pub struct UcbObjective<'a> {
    pub gp: &'a GpPosterior,
    pub beta: f64,
    pub action_box: &'a [(f64, f64)],
    pub support: Vec<usize>,
}

impl UcbObjective<'_> {
    pub fn decode(&self, theta: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; self.action_box.len()];
        for (k, &slot) in self.support.iter().enumerate() {
            let (lo, hi) = self.action_box[slot];
            a[slot] = lo + theta[k] * (hi - lo);
        }
        a
    }
}

impl Objective for UcbObjective<'_> {
    fn dim(&self) -> usize {
        self.support.len()
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..self.support.len()).map(|_| rng.gen::<f64>()).collect()
    }

    fn project(&self, theta: &mut [f64]) {
        theta.iter_mut().for_each(|u| *u = u.clamp(0.0, 1.0));
    }

    fn score(&self, theta: &[f64]) -> Result<f64> {
        let a = self.decode(theta);
        let m = self.gp.mean(&a)?[0];
        let v = self.gp.var(&a)?[0];
        Ok(m + self.beta * v.sqrt())
    }

    fn value_and_grad(&self, theta: &[f64], _restart: usize) -> Result<(f64, Vec<f64>)> {
        let a = self.decode(theta);
        let (mean, std, jac) = self.gp.moments(&a)?;
        let grad = self
            .support
            .iter()
            .map(|&slot| {
                let (lo, hi) = self.action_box[slot];
                (jac.dmean[slot] + self.beta * jac.dstd[slot]) * (hi - lo)
            })
            .collect();
        Ok((mean[0] + self.beta * std[0], grad))
    }
}

/// Maximizes the single-GP UCB over the action box, honoring a
/// cardinality limit by support enumeration.
pub fn optimize_ucb(
    gp: &GpPosterior,
    beta: f64,
    action_box: &[(f64, f64)],
    cardinality_limit: Option<usize>,
    cfg: &AcqConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, f64)> {
    let a = action_box.len();
    let sups = enumerate_supports(a, cardinality_limit, cfg.max_supports).unwrap_or_else(|| {
        // too many supports: sample a manageable subset
        let c = cardinality_limit.unwrap_or(a);
        (0..cfg.max_supports)
            .map(|_| {
                let mut s = rand::seq::index::sample(rng, a, c).into_vec();
                s.sort_unstable();
                s
            })
            .collect()
    });
    let mut best: Option<(Vec<f64>, f64)> = None;
    for support in sups {
        let obj = UcbObjective {
            gp,
            beta,
            action_box,
            support,
        };
        let mut sub = ChaCha8Rng::seed_from_u64(rng.gen());
        let (th, v) = multistart_ascent(&obj, &cfg.into(), &mut sub)?;
        if best.as_ref().is_none_or(|b| v > b.1) {
            best = Some((obj.decode(&th), v));
        }
    }
    best.ok_or(McboError::NoFeasibleCandidate)
}
