//! Functions `eta_i: (z, a) -> [-1, 1]^d` that select one plausible
//! mechanism `mu + beta * sigma * eta` inside the confidence band.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{McboError, Result};

/// Affine map of raw inputs onto the unit box: `(s - shift) * scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputScaling {
    pub shift: Vec<f64>,
    pub scale: Vec<f64>,
}

impl InputScaling {
    pub fn identity(dim: usize) -> Self {
        Self {
            shift: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    /// Min/max scaling from observed inputs; degenerate dimensions keep
    /// unit scale.
    pub fn from_data(inputs: &[Vec<f64>], dim: usize) -> Self {
        if inputs.is_empty() {
            return Self::identity(dim);
        }
        let mut shift = vec![f64::INFINITY; dim];
        let mut hi = vec![f64::NEG_INFINITY; dim];
        for x in inputs {
            for j in 0..dim {
                shift[j] = shift[j].min(x[j]);
                hi[j] = hi[j].max(x[j]);
            }
        }
        let scale = shift
            .iter()
            .zip(&hi)
            .map(|(lo, hi)| if hi - lo > 1e-12 { 1.0 / (hi - lo) } else { 1.0 })
            .collect();
        Self { shift, scale }
    }

    fn apply(&self, s: &[f64]) -> Vec<f64> {
        s.iter()
            .zip(&self.shift)
            .zip(&self.scale)
            .map(|((x, m), c)| (x - m) * c)
            .collect()
    }
}

/// Two-layer ReLU network squashed into `[-1, 1]` by `2 sigmoid(.) - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaNet {
    pub in_dim: usize,
    pub hidden: usize,
    pub out_dim: usize,
    /// `hidden x in_dim`, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `out_dim x hidden`, row-major.
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub scaling: InputScaling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EtaParam {
    Constant { value: Vec<f64> },
    TwoLayerNet(EtaNet),
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl EtaNet {
    pub fn zeros(in_dim: usize, hidden: usize, out_dim: usize, scaling: InputScaling) -> Self {
        Self {
            in_dim,
            hidden,
            out_dim,
            w1: vec![0.0; hidden * in_dim],
            b1: vec![0.0; hidden],
            w2: vec![0.0; out_dim * hidden],
            b2: vec![0.0; out_dim],
            scaling,
        }
    }

    /// Random initialization whose outputs spread over `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(
        in_dim: usize,
        hidden: usize,
        out_dim: usize,
        scaling: InputScaling,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::zeros(in_dim, hidden, out_dim, scaling);
        let s1 = 1.0 / (in_dim.max(1) as f64).sqrt();
        let s2 = 1.0 / (hidden.max(1) as f64).sqrt();
        net.w1.iter_mut().for_each(|w| *w = s1 * rng.sample::<f64, _>(StandardNormal));
        net.b1.iter_mut().for_each(|b| *b = 0.5 * rng.sample::<f64, _>(StandardNormal));
        net.w2.iter_mut().for_each(|w| *w = 2.0 * s2 * rng.sample::<f64, _>(StandardNormal));
        net.b2.iter_mut().for_each(|b| *b = rng.gen_range(-3.0..3.0));
        net
    }

    pub fn num_params(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    fn hidden_pre(&self, x: &[f64]) -> Vec<f64> {
        (0..self.hidden)
            .map(|k| {
                self.b1[k]
                    + self.w1[k * self.in_dim..(k + 1) * self.in_dim]
                        .iter()
                        .zip(x)
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
            })
            .collect()
    }

    /// Output before the squash.
    pub fn pre_squash(&self, s: &[f64]) -> Vec<f64> {
        let x = self.scaling.apply(s);
        let h: Vec<f64> = self.hidden_pre(&x).into_iter().map(|v| v.max(0.0)).collect();
        (0..self.out_dim)
            .map(|l| {
                self.b2[l]
                    + self.w2[l * self.hidden..(l + 1) * self.hidden]
                        .iter()
                        .zip(&h)
                        .map(|(w, v)| w * v)
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn eval(&self, s: &[f64]) -> Vec<f64> {
        self.pre_squash(s)
            .into_iter()
            .map(|o| 2.0 * sigmoid(o) - 1.0)
            .collect()
    }

    /// Vector-Jacobian product: given `u = dL/d eta`, returns
    /// `(dL/ds, dL/dparams)` with parameters ordered `w1, b1, w2, b2`.
    pub fn vjp(&self, s: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (p, h, d) = (self.in_dim, self.hidden, self.out_dim);
        let x = self.scaling.apply(s);
        let pre1 = self.hidden_pre(&x);
        let act: Vec<f64> = pre1.iter().map(|v| v.max(0.0)).collect();
        let mut grad = vec![0.0; self.num_params()];
        let (gw1, rest) = grad.split_at_mut(h * p);
        let (gb1, rest) = rest.split_at_mut(h);
        let (gw2, gb2) = rest.split_at_mut(d * h);

        let mut dact = vec![0.0; h];
        for l in 0..d {
            let o = self.b2[l]
                + self.w2[l * h..(l + 1) * h]
                    .iter()
                    .zip(&act)
                    .map(|(w, v)| w * v)
                    .sum::<f64>();
            let sg = sigmoid(o);
            let g = u[l] * 2.0 * sg * (1.0 - sg);
            gb2[l] = g;
            for k in 0..h {
                gw2[l * h + k] = g * act[k];
                dact[k] += g * self.w2[l * h + k];
            }
        }
        let mut dx = vec![0.0; p];
        for k in 0..h {
            if pre1[k] <= 0.0 {
                continue;
            }
            gb1[k] = dact[k];
            for j in 0..p {
                gw1[k * p + j] = dact[k] * x[j];
                dx[j] += dact[k] * self.w1[k * p + j];
            }
        }
        let ds = dx
            .iter()
            .zip(&self.scaling.scale)
            .map(|(g, c)| g * c)
            .collect();
        (ds, grad)
    }

    pub fn params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        v.extend_from_slice(&self.w1);
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.extend_from_slice(&self.b2);
        v
    }

    pub fn set_params(&mut self, theta: &[f64]) {
        let (a, rest) = theta.split_at(self.w1.len());
        let (b, rest) = rest.split_at(self.b1.len());
        let (c, e) = rest.split_at(self.w2.len());
        self.w1.copy_from_slice(a);
        self.b1.copy_from_slice(b);
        self.w2.copy_from_slice(c);
        self.b2.copy_from_slice(e);
    }
}

impl EtaParam {
    pub fn constant(value: Vec<f64>) -> Self {
        EtaParam::Constant { value }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            EtaParam::Constant { value } => value.len(),
            EtaParam::TwoLayerNet(net) => net.out_dim,
        }
    }

    pub fn num_params(&self) -> usize {
        match self {
            EtaParam::Constant { value } => value.len(),
            EtaParam::TwoLayerNet(net) => net.num_params(),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            EtaParam::Constant { value } => value.clone(),
            EtaParam::TwoLayerNet(net) => net.params(),
        }
    }

    pub fn set_params(&mut self, theta: &[f64]) {
        match self {
            EtaParam::Constant { value } => value.copy_from_slice(theta),
            EtaParam::TwoLayerNet(net) => net.set_params(theta),
        }
    }

    /// Keeps constant values inside `[-1, 1]`; networks are unconstrained.
    pub fn project(&self, theta: &mut [f64]) {
        if let EtaParam::Constant { .. } = self {
            theta.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
        }
    }

    /// Value at `s` without dimension checks.
    pub fn eval(&self, s: &[f64]) -> Vec<f64> {
        match self {
            EtaParam::Constant { value } => value.iter().map(|v| v.clamp(-1.0, 1.0)).collect(),
            EtaParam::TwoLayerNet(net) => net.eval(s),
        }
    }

    /// `(dL/ds, dL/dparams)` for upstream gradient `u`.
    pub fn vjp(&self, s: &[f64], u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match self {
            EtaParam::Constant { value } => {
                let g = value
                    .iter()
                    .zip(u)
                    .map(|(v, u)| if v.abs() <= 1.0 { *u } else { 0.0 })
                    .collect();
                (vec![0.0; s.len()], g)
            }
            EtaParam::TwoLayerNet(net) => net.vjp(s, u),
        }
    }
}

/// Evaluates `eta` at the concatenated input `(z, a)`.
pub fn eta_eval(eta: &EtaParam, z: &[f64], a: &[f64]) -> Result<Vec<f64>> {
    let s: Vec<f64> = z.iter().chain(a).copied().collect();
    if let EtaParam::TwoLayerNet(net) = eta {
        if s.len() != net.in_dim {
            return Err(McboError::DimMismatch {
                expected: net.in_dim,
                got: s.len(),
            });
        }
    }
    Ok(eta.eval(&s))
}
