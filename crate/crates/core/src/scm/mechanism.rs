use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{McboError, Result};

type MechanismFn = dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync;

/// Deterministic map `(z_i, a_i) -> x_i` of one node, with a
/// human-readable formula used for manifests and hashing.
#[derive(Clone)]
pub struct Mechanism {
    formula: String,
    out_dim: usize,
    func: Arc<MechanismFn>,
}

impl fmt::Debug for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mechanism")
            .field("formula", &self.formula)
            .field("out_dim", &self.out_dim)
            .finish()
    }
}

impl Mechanism {
    pub fn new(
        formula: impl Into<String>,
        out_dim: usize,
        func: impl Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            formula: formula.into(),
            out_dim,
            func: Arc::new(func),
        }
    }

    /// Scalar mechanism from a closure returning one value.
    pub fn scalar(
        formula: impl Into<String>,
        func: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(formula, 1, move |z, a| vec![func(z, a)])
    }

    pub fn eval(&self, z: &[f64], a: &[f64]) -> Vec<f64> {
        (self.func)(z, a)
    }

    pub fn formula(&self) -> &str {
        &self.formula
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }
}

/// A mechanism reference in a task file: registry name plus parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismRef {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

fn param_vec(params: &Value, key: &str) -> Result<Option<Vec<f64>>> {
    match params.get(key) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v.clone())
            .map(Some)
            .map_err(|e| McboError::Config(format!("parameter `{key}`: {e}"))),
    }
}

fn param_f64(params: &Value, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| McboError::Config(format!("parameter `{key}` must be a number"))),
    }
}

fn concat(z: &[f64], a: &[f64]) -> Vec<f64> {
    z.iter().chain(a).copied().collect()
}

/// Names accepted by [`from_registry`].
pub const REGISTRY: &[&str] = &["zero", "sum", "linear", "tanh_linear", "neg_square", "sin_sum", "product"];

/// Builds a named mechanism. All registry mechanisms are applied to the
/// concatenated input `s = (z, a)` and broadcast to `out_dim` components.
///
/// | name          | formula                         | params            |
/// |---------------|---------------------------------|-------------------|
/// | `zero`        | `0`                             |                   |
/// | `sum`         | `sum(s)`                        |                   |
/// | `linear`      | `w . s + b`                     | `weights`, `bias` |
/// | `tanh_linear` | `tanh(w . s + b)`               | `weights`, `bias` |
/// | `neg_square`  | `-sum((s - c)^2)`               | `center`          |
/// | `sin_sum`     | `sin(f * sum(s))`               | `freq`            |
/// | `product`     | `prod(s)`                       |                   |
pub fn from_registry(r: &MechanismRef, input_dim: usize, out_dim: usize) -> Result<Mechanism> {
    let p = &r.params;
    let check_len = |v: &Vec<f64>, what: &str| -> Result<()> {
        if v.len() != input_dim {
            return Err(McboError::Config(format!(
                "mechanism `{}`: {what} has length {}, input has {input_dim}",
                r.name,
                v.len()
            )));
        }
        Ok(())
    };
    let bcast = move |v: f64| vec![v; out_dim];
    let m = match r.name.as_str() {
        "zero" => Mechanism::new("0", out_dim, move |_, _| bcast(0.0)),
        "sum" => Mechanism::new("sum(z) + sum(a)", out_dim, move |z, a| {
            bcast(z.iter().sum::<f64>() + a.iter().sum::<f64>())
        }),
        "linear" | "tanh_linear" => {
            let w = param_vec(p, "weights")?.unwrap_or_else(|| vec![1.0; input_dim]);
            check_len(&w, "weights")?;
            let b = param_f64(p, "bias", 0.0)?;
            let squash = r.name == "tanh_linear";
            let formula = if squash {
                format!("tanh({w:?} . s + {b})")
            } else {
                format!("{w:?} . s + {b}")
            };
            Mechanism::new(formula, out_dim, move |z, a| {
                let s = concat(z, a);
                let v = w.iter().zip(&s).map(|(w, x)| w * x).sum::<f64>() + b;
                bcast(if squash { v.tanh() } else { v })
            })
        }
        "neg_square" => {
            let c = param_vec(p, "center")?.unwrap_or_else(|| vec![0.0; input_dim]);
            check_len(&c, "center")?;
            Mechanism::new(format!("-|s - {c:?}|^2"), out_dim, move |z, a| {
                let s = concat(z, a);
                bcast(-s.iter().zip(&c).map(|(x, c)| (x - c) * (x - c)).sum::<f64>())
            })
        }
        "sin_sum" => {
            let f = param_f64(p, "freq", 1.0)?;
            Mechanism::new(format!("sin({f} * sum(s))"), out_dim, move |z, a| {
                bcast((f * (z.iter().sum::<f64>() + a.iter().sum::<f64>())).sin())
            })
        }
        "product" => Mechanism::new("prod(s)", out_dim, move |z, a| {
            bcast(z.iter().chain(a).product())
        }),
        other => return Err(McboError::UnknownMechanism(other.to_string())),
    };
    Ok(m)
}
