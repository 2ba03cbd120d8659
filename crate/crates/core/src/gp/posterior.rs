use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::Kernel;
use crate::error::{McboError, Result};

/// Initial diagonal jitter; escalated by 10x up to [`MAX_JITTER`].
pub const MIN_JITTER: f64 = 1e-6;
pub const MAX_JITTER: f64 = 1e-4;

static NEGATIVE_VARIANCE_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of queries whose raw posterior variance fell below `-1e-9`
/// before flooring, process-wide.
pub fn negative_variance_events() -> u64 {
    NEGATIVE_VARIANCE_EVENTS.load(Ordering::Relaxed)
}

/// Training data of one node: inputs `(z, a)` flattened, outputs `x`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GpDataset {
    pub inputs: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
    pub noise_var: f64,
}

impl GpDataset {
    pub fn new(noise_var: f64) -> Self {
        Self {
            inputs: Vec::new(),
            outputs: Vec::new(),
            noise_var,
        }
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn push(&mut self, input: Vec<f64>, output: Vec<f64>) {
        self.inputs.push(input);
        self.outputs.push(output);
    }
}

/// Mean, variance and their input Jacobians at one query. Jacobians are
/// row-major `out_dim x input_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub dmean: Vec<f64>,
    pub dvar: Vec<f64>,
}

impl Prediction {
    pub fn std(&self) -> Vec<f64> {
        self.var.iter().map(|v| v.sqrt()).collect()
    }
}

/// Jacobians of the posterior mean and standard deviation with respect to
/// the query input, each row-major `out_dim x input_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputJacobians {
    pub dmean: Vec<f64>,
    pub dstd: Vec<f64>,
}

/// Fitted posterior snapshot of a vector-valued GP.
///
/// Observations are stacked in the order `(t=1, l=1), (t=1, l=2), ...,
/// (t=n, l=d)`; the Gram matrix over this index is factorized once.
#[derive(Debug, Clone)]
pub struct GpPosterior {
    kernel: Kernel,
    data: GpDataset,
    input_dim: usize,
    out_dim: usize,
    /// Lower Cholesky factor, row-major.
    chol: Vec<f64>,
    /// Same factor transposed, row-major (column-major `L`).
    chol_t: Vec<f64>,
    alpha: Vec<f64>,
    jitter: f64,
}

#[derive(Serialize)]
struct GpDump<'a> {
    kernel: &'a Kernel,
    input_dim: usize,
    out_dim: usize,
    jitter: f64,
    data: &'a GpDataset,
}

impl GpPosterior {
    /// Prior for inputs of the given sizes.
    pub fn prior(kernel: Kernel, input_dim: usize, out_dim: usize, noise_var: f64) -> Self {
        Self {
            kernel,
            data: GpDataset::new(noise_var),
            input_dim,
            out_dim,
            chol: Vec::new(),
            chol_t: Vec::new(),
            alpha: Vec::new(),
            jitter: 0.0,
        }
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn data(&self) -> &GpDataset {
        &self.data
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn noise_var(&self) -> f64 {
        self.data.noise_var
    }

    /// Extra diagonal jitter that was needed on top of the noise variance.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Size of the stacked index, `n * d`.
    fn size(&self) -> usize {
        self.data.len() * self.out_dim
    }

    /// Dense `K_t + rho^2 I` (including jitter) over the stacked index.
    pub fn gram(&self) -> DMatrix<f64> {
        gram_matrix(&self.kernel, &self.data, self.out_dim, self.data.noise_var + self.jitter)
    }

    /// Lower Cholesky factor as a dense matrix.
    pub fn chol_factor(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_row_slice(n, n, &self.chol)
    }

    /// Debug dump of data and hyperparameters.
    pub fn to_debug_json(&self) -> String {
        serde_json::to_string_pretty(&GpDump {
            kernel: &self.kernel,
            input_dim: self.input_dim,
            out_dim: self.out_dim,
            jitter: self.jitter,
            data: &self.data,
        })
        .expect("dump serializes")
    }

    fn check_input(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.input_dim {
            return Err(McboError::DimMismatch {
                expected: self.input_dim,
                got: s.len(),
            });
        }
        Ok(())
    }

    /// `L v = b`, in place.
    fn forward_solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n {
            let row = &self.chol[i * n..i * n + i];
            let s: f64 = row.iter().zip(&b[..i]).map(|(l, v)| l * v).sum();
            b[i] = (b[i] - s) / self.chol[i * n + i];
        }
    }

    /// `L^T v = b`, in place.
    fn backward_solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in (0..n).rev() {
            let col = &self.chol_t[i * n + i + 1..(i + 1) * n];
            let s: f64 = col.iter().zip(&b[i + 1..]).map(|(l, v)| l * v).sum();
            b[i] = (b[i] - s) / self.chol_t[i * n + i];
        }
    }

    /// Posterior mean per output component.
    pub fn mean(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_input(s)?;
        let d = self.out_dim;
        let mut out = vec![0.0; d];
        for (t, x) in self.data.inputs.iter().enumerate() {
            let k = self.kernel.base(x, s);
            for (l, o) in out.iter_mut().enumerate() {
                *o += k * self.alpha[t * d + l];
            }
        }
        Ok(out)
    }

    /// Posterior variance per output component, floored at zero.
    pub fn var(&self, s: &[f64]) -> Result<Vec<f64>> {
        self.check_input(s)?;
        let n = self.data.len();
        let prior = self.kernel.base(s, s);
        if n == 0 {
            return Ok(vec![prior; self.out_dim]);
        }
        let kvec: Vec<f64> = self.data.inputs.iter().map(|x| self.kernel.base(x, s)).collect();
        Ok((0..self.out_dim)
            .map(|l| {
                let mut w = self.stacked(&kvec, l);
                self.forward_solve(&mut w);
                floor_var(prior - w.iter().map(|v| v * v).sum::<f64>())
            })
            .collect())
    }

    /// Spreads a per-point kernel vector onto the stacked index for
    /// output component `l`.
    fn stacked(&self, kvec: &[f64], l: usize) -> Vec<f64> {
        let d = self.out_dim;
        let mut out = vec![0.0; kvec.len() * d];
        for (t, k) in kvec.iter().enumerate() {
            out[t * d + l] = *k;
        }
        out
    }

    /// Mean, variance and their gradients in one pass.
    pub fn predict(&self, s: &[f64]) -> Result<Prediction> {
        self.check_input(s)?;
        let p = self.input_dim;
        let d = self.out_dim;
        let n = self.data.len();
        let mut dprior = vec![0.0; p];
        let prior = self.kernel.diag_with_grad(s, &mut dprior);

        let mut kvec = vec![0.0; n];
        let mut dk = vec![0.0; n * p];
        for (t, x) in self.data.inputs.iter().enumerate() {
            kvec[t] = self.kernel.base_with_grad(x, s, &mut dk[t * p..(t + 1) * p]);
        }

        let mut mean = vec![0.0; d];
        let mut dmean = vec![0.0; d * p];
        let mut var = vec![prior; d];
        let mut dvar = vec![0.0; d * p];
        for l in 0..d {
            for t in 0..n {
                let a = self.alpha[t * d + l];
                mean[l] += kvec[t] * a;
                for j in 0..p {
                    dmean[l * p + j] += dk[t * p + j] * a;
                }
            }
            dvar[l * p..(l + 1) * p].copy_from_slice(&dprior);
            if n > 0 {
                let mut v = self.stacked(&kvec, l);
                self.forward_solve(&mut v);
                let raw = prior - v.iter().map(|x| x * x).sum::<f64>();
                self.backward_solve(&mut v);
                var[l] = floor_var(raw);
                if raw > 0.0 {
                    for t in 0..n {
                        let c = 2.0 * v[t * d + l];
                        for j in 0..p {
                            dvar[l * p + j] -= c * dk[t * p + j];
                        }
                    }
                } else {
                    dvar[l * p..(l + 1) * p].iter_mut().for_each(|g| *g = 0.0);
                }
            }
        }
        Ok(Prediction {
            mean,
            var,
            dmean,
            dvar,
        })
    }

    /// Jacobians of the mean and standard deviation with respect to the
    /// query input. The standard-deviation gradient is zero wherever the
    /// variance has collapsed to the floor.
    pub fn input_jacobians(&self, s: &[f64]) -> Result<InputJacobians> {
        Ok(self.moments(s)?.2)
    }

    /// Mean, standard deviation and their input Jacobians in one pass.
    pub fn moments(&self, s: &[f64]) -> Result<(Vec<f64>, Vec<f64>, InputJacobians)> {
        let pred = self.predict(s)?;
        let p = self.input_dim;
        let mut dstd = pred.dvar.clone();
        for (l, v) in pred.var.iter().enumerate() {
            let row = &mut dstd[l * p..(l + 1) * p];
            if *v > STD_GRAD_FLOOR {
                let c = 0.5 / v.sqrt();
                row.iter_mut().for_each(|g| *g *= c);
            } else {
                row.iter_mut().for_each(|g| *g = 0.0);
            }
        }
        let std = pred.std();
        Ok((
            pred.mean,
            std,
            InputJacobians {
                dmean: pred.dmean,
                dstd,
            },
        ))
    }

    /// Lower and upper confidence bounds `mu -/+ beta * sigma`.
    pub fn confidence_bounds(&self, s: &[f64], beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let mean = self.mean(s)?;
        let var = self.var(s)?;
        let lower = mean.iter().zip(&var).map(|(m, v)| m - beta * v.sqrt()).collect();
        let upper = mean.iter().zip(&var).map(|(m, v)| m + beta * v.sqrt()).collect();
        Ok((lower, upper))
    }
}

/// Variances at or below this are treated as collapsed when
/// differentiating the standard deviation.
pub const STD_GRAD_FLOOR: f64 = 1e-18;

fn floor_var(raw: f64) -> f64 {
    if raw < -1e-9 {
        NEGATIVE_VARIANCE_EVENTS.fetch_add(1, Ordering::Relaxed);
    }
    raw.max(0.0)
}

fn gram_matrix(kernel: &Kernel, data: &GpDataset, d: usize, diag: f64) -> DMatrix<f64> {
    let n = data.len();
    let mut k = DMatrix::zeros(n * d, n * d);
    for t1 in 0..n {
        for t2 in 0..=t1 {
            let v = kernel.base(&data.inputs[t1], &data.inputs[t2]);
            for l in 0..d {
                k[(t1 * d + l, t2 * d + l)] = v;
                k[(t2 * d + l, t1 * d + l)] = v;
            }
        }
    }
    for i in 0..n * d {
        k[(i, i)] += diag;
    }
    k
}

/// Fits the posterior. Noiseless data should be passed with a small
/// `noise_var` such as [`MIN_JITTER`]; when the factorization still fails,
/// jitter is escalated by 10x up to [`MAX_JITTER`].
pub fn fit(kernel: Kernel, data: GpDataset, input_dim: usize, out_dim: usize) -> Result<GpPosterior> {
    kernel.validate()?;
    if !(data.noise_var > 0.0) {
        return Err(McboError::InvalidKernel(format!(
            "noise variance must be positive, got {}",
            data.noise_var
        )));
    }
    if data.inputs.len() != data.outputs.len() {
        return Err(McboError::DimMismatch {
            expected: data.inputs.len(),
            got: data.outputs.len(),
        });
    }
    for x in &data.inputs {
        if x.len() != input_dim {
            return Err(McboError::DimMismatch {
                expected: input_dim,
                got: x.len(),
            });
        }
    }
    for y in &data.outputs {
        if y.len() != out_dim {
            return Err(McboError::DimMismatch {
                expected: out_dim,
                got: y.len(),
            });
        }
    }

    let mut gp = GpPosterior::prior(kernel, input_dim, out_dim, data.noise_var);
    gp.data = data;
    let n = gp.size();
    if n == 0 {
        return Ok(gp);
    }

    let base = gram_matrix(&gp.kernel, &gp.data, out_dim, gp.data.noise_var);
    let mut jitter = 0.0;
    let chol = loop {
        let mut m = base.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(c) = m.cholesky() {
            break c;
        }
        jitter = if jitter == 0.0 { MIN_JITTER } else { jitter * 10.0 };
        if jitter > MAX_JITTER * (1.0 + 1e-12) {
            return Err(McboError::NotPositiveDefinite { jitter: MAX_JITTER });
        }
    };
    gp.jitter = jitter;
    let l = chol.l();
    gp.chol = l.transpose().as_slice().to_vec();
    gp.chol_t = l.as_slice().to_vec();

    let mut alpha: Vec<f64> = gp.data.outputs.iter().flatten().copied().collect();
    gp.forward_solve(&mut alpha);
    gp.backward_solve(&mut alpha);
    gp.alpha = alpha;
    Ok(gp)
}
