use serde::{Deserialize, Serialize};

use crate::error::{McboError, Result};

/// Base kernel on mechanism inputs `(z, a)`. Output components are modelled
/// independently: augmented inputs with different output indices never
/// correlate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Rbf { lengthscale: f64, variance: f64 },
    Linear { variance: f64 },
}

impl Default for Kernel {
    fn default() -> Self {
        Kernel::Rbf {
            lengthscale: 1.0,
            variance: 1.0,
        }
    }
}

impl Kernel {
    pub fn rbf(lengthscale: f64, variance: f64) -> Self {
        Kernel::Rbf {
            lengthscale,
            variance,
        }
    }

    pub fn linear(variance: f64) -> Self {
        Kernel::Linear { variance }
    }

    /// Variance must lie in (0, 1] so that `k(s, s) <= 1` for rbf.
    pub fn validate(&self) -> Result<()> {
        let variance = match *self {
            Kernel::Rbf {
                lengthscale,
                variance,
            } => {
                if !(lengthscale > 0.0 && lengthscale.is_finite()) {
                    return Err(McboError::InvalidKernel(format!(
                        "lengthscale must be positive, got {lengthscale}"
                    )));
                }
                variance
            }
            Kernel::Linear { variance } => variance,
        };
        if !(variance > 0.0 && variance <= 1.0) {
            return Err(McboError::InvalidKernel(format!(
                "variance must lie in (0, 1], got {variance}"
            )));
        }
        Ok(())
    }

    /// Base kernel value, no output index.
    #[inline]
    pub fn base(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Rbf {
                lengthscale,
                variance,
            } => {
                let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                variance * (-0.5 * r2 / (lengthscale * lengthscale)).exp()
            }
            Kernel::Linear { variance } => variance * x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>(),
        }
    }

    /// Writes `d k(x, y) / d y` into `out`; returns `k(x, y)`.
    #[inline]
    pub fn base_with_grad(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> f64 {
        match *self {
            Kernel::Rbf { lengthscale, .. } => {
                let k = self.base(x, y);
                let inv = 1.0 / (lengthscale * lengthscale);
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = k * (a - b) * inv;
                }
                k
            }
            Kernel::Linear { variance } => {
                for (o, a) in out.iter_mut().zip(x) {
                    *o = variance * a;
                }
                self.base(x, y)
            }
        }
    }

    /// `k(y, y)` and its gradient with respect to `y`.
    pub fn diag_with_grad(&self, y: &[f64], out: &mut [f64]) -> f64 {
        match *self {
            Kernel::Rbf { variance, .. } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                variance
            }
            Kernel::Linear { variance } => {
                for (o, b) in out.iter_mut().zip(y) {
                    *o = 2.0 * variance * b;
                }
                self.base(y, y)
            }
        }
    }
}

/// Kernel on augmented inputs `(z, a, l)`.
pub fn kernel_eval(kernel: &Kernel, s1: (&[f64], usize), s2: (&[f64], usize)) -> Result<f64> {
    if s1.0.len() != s2.0.len() {
        return Err(McboError::DimMismatch {
            expected: s1.0.len(),
            got: s2.0.len(),
        });
    }
    if s1.1 != s2.1 {
        return Ok(0.0);
    }
    Ok(kernel.base(s1.0, s2.0))
}
