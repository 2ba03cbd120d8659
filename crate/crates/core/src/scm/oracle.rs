//! Brute-force reference values used for regret.
//!
//! The oracle fixes one set of noise draws up front (common random
//! numbers), so every intervention is scored against the same draws and
//! comparisons between interventions are not blurred by Monte-Carlo noise.

use rand::Rng;

use super::model::{Intervention, Scm};
use crate::error::{McboError, Result};
use crate::graph::InterventionTargets;

/// Default points per action dimension.
pub const DEFAULT_GRID: usize = 25;
/// Default Monte-Carlo draws for noisy systems.
pub const DEFAULT_ORACLE_MC: usize = 2000;
/// Default cap on `grid points x draws`.
pub const DEFAULT_BUDGET: u128 = 50_000_000;

#[derive(Debug, Clone)]
pub struct Oracle<'a> {
    scm: &'a Scm,
    draws: Vec<Vec<Vec<f64>>>,
    budget: u128,
    polish: bool,
}

impl<'a> Oracle<'a> {
    pub fn new<R: Rng + ?Sized>(scm: &'a Scm, n_mc: usize, rng: &mut R) -> Self {
        let n = if scm.is_noiseless() { 1 } else { n_mc.max(1) };
        let draws = (0..n)
            .map(|_| {
                if scm.is_noiseless() {
                    (0..scm.dag().num_nodes())
                        .map(|i| vec![0.0; scm.dag().obs_dim(i)])
                        .collect()
                } else {
                    scm.draw_noise(rng)
                }
            })
            .collect();
        Self {
            scm,
            draws,
            budget: DEFAULT_BUDGET,
            polish: true,
        }
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// Disables the local pattern-search refinement after the grid.
    pub fn without_polish(mut self) -> Self {
        self.polish = false;
        self
    }

    pub fn num_draws(&self) -> usize {
        self.draws.len()
    }

    /// Average reward over the fixed draws.
    pub fn expected_reward(&self, iv: &Intervention) -> Result<f64> {
        let mut total = 0.0;
        for d in &self.draws {
            total += self.scm.simulate_with_noise(iv, d)?.reward;
        }
        Ok(total / self.draws.len() as f64)
    }

    /// Grid search over the feasible intervention space, followed by a
    /// coordinate pattern search from the best grid point.
    pub fn best(&self, grid_per_dim: usize) -> Result<(Intervention, f64)> {
        let grid_per_dim = grid_per_dim.max(1);
        let blocks = self.search_blocks()?;
        let points: u128 = blocks
            .iter()
            .map(|b| (grid_per_dim as u128).saturating_pow(b.bounds.len() as u32))
            .sum();
        let needed = points.saturating_mul(self.draws.len() as u128);
        if needed > self.budget {
            return Err(McboError::GridBudgetExceeded {
                needed,
                budget: self.budget,
            });
        }

        let mut best: Option<(Intervention, f64)> = None;
        for block in &blocks {
            let (x, v) = self.grid_block(block, grid_per_dim)?;
            let (x, v) = if self.polish && !block.bounds.is_empty() {
                self.pattern_search(block, x, v, grid_per_dim)?
            } else {
                (x, v)
            };
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((block.build(&x), v));
            }
        }
        best.ok_or(McboError::NoFeasibleCandidate)
    }

    fn search_blocks(&self) -> Result<Vec<Block>> {
        let scm = self.scm;
        if let Some(hard) = scm.hard() {
            return Ok(scm
                .minimal_targets()
                .into_iter()
                .map(|targets| {
                    let bounds = targets
                        .iter()
                        .flat_map(|t| vec![hard.value_box[t]; scm.dag().obs_dim(t)])
                        .collect();
                    let dims = targets.iter().map(|t| scm.dag().obs_dim(t)).collect();
                    Block {
                        kind: BlockKind::Hard { targets, dims },
                        bounds,
                    }
                })
                .collect());
        }
        let a = scm.num_actions();
        let supports: Vec<Vec<usize>> = match scm.cardinality_limit() {
            Some(c) if c < a => {
                if scm.action_box().iter().any(|(lo, hi)| !(*lo <= 0.0 && *hi >= 0.0)) {
                    return Err(McboError::Config(
                        "cardinality limits need 0 inside every action box".into(),
                    ));
                }
                combinations(a, c)
            }
            _ => vec![(0..a).collect()],
        };
        Ok(supports
            .into_iter()
            .map(|support| Block {
                bounds: support.iter().map(|&k| scm.action_box()[k]).collect(),
                kind: BlockKind::Soft {
                    support,
                    num_actions: a,
                },
            })
            .collect())
    }

    fn grid_block(&self, block: &Block, g: usize) -> Result<(Vec<f64>, f64)> {
        let dims = block.bounds.len();
        let mut idx = vec![0usize; dims];
        let mut best: Option<(Vec<f64>, f64)> = None;
        loop {
            let x: Vec<f64> = idx
                .iter()
                .zip(&block.bounds)
                .map(|(&k, &(lo, hi))| grid_value(lo, hi, k, g))
                .collect();
            let v = self.expected_reward(&block.build(&x))?;
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((x, v));
            }
            // odometer increment
            let mut d = 0;
            while d < dims {
                idx[d] += 1;
                if idx[d] < g {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == dims {
                break;
            }
        }
        Ok(best.expect("grid has at least one point"))
    }

    fn pattern_search(&self, block: &Block, mut x: Vec<f64>, mut v: f64, g: usize) -> Result<(Vec<f64>, f64)> {
        let widths: Vec<f64> = block.bounds.iter().map(|(lo, hi)| hi - lo).collect();
        let mut step = 1.0 / (g.max(2) - 1) as f64;
        let mut evals = 0;
        let max_evals = 400 * block.bounds.len();
        while step > 1e-7 && evals < max_evals {
            let mut improved = false;
            for d in 0..x.len() {
                for sign in [1.0, -1.0] {
                    let (lo, hi) = block.bounds[d];
                    let cand = (x[d] + sign * step * widths[d]).clamp(lo, hi);
                    if cand == x[d] {
                        continue;
                    }
                    let mut y = x.clone();
                    y[d] = cand;
                    let vy = self.expected_reward(&block.build(&y))?;
                    evals += 1;
                    if vy > v {
                        x = y;
                        v = vy;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        Ok((x, v))
    }
}

#[derive(Debug, Clone)]
enum BlockKind {
    Soft { support: Vec<usize>, num_actions: usize },
    Hard { targets: InterventionTargets, dims: Vec<usize> },
}

/// A group of continuous variables searched jointly.
#[derive(Debug, Clone)]
struct Block {
    kind: BlockKind,
    bounds: Vec<(f64, f64)>,
}

impl Block {
    fn build(&self, x: &[f64]) -> Intervention {
        match &self.kind {
            BlockKind::Soft { support, num_actions } => {
                let mut actions = vec![0.0; *num_actions];
                for (&k, &v) in support.iter().zip(x) {
                    actions[k] = v;
                }
                Intervention::Soft { actions }
            }
            BlockKind::Hard { targets, dims } => {
                let mut values = Vec::with_capacity(dims.len());
                let mut off = 0;
                for &d in dims {
                    values.push(x[off..off + d].to_vec());
                    off += d;
                }
                Intervention::hard(targets.clone(), values)
            }
        }
    }
}

fn grid_value(lo: f64, hi: f64, k: usize, g: usize) -> f64 {
    if g == 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * k as f64 / (g - 1) as f64
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k.min(n), &mut cur, &mut out);
    out
}

/// Best intervention on a grid of `grid_per_dim` points per continuous
/// dimension, scored with `n_mc` fixed draws for noisy systems.
pub fn oracle_best<R: Rng + ?Sized>(
    scm: &Scm,
    grid_per_dim: usize,
    n_mc: usize,
    rng: &mut R,
) -> Result<(Intervention, f64)> {
    Oracle::new(scm, n_mc, rng).best(grid_per_dim)
}
