//! Built-in benchmark tasks. Formulas are listed in `TASKS.md`.

use std::f64::consts::{E, PI};

use super::mechanism::Mechanism;
use super::model::{HardSpec, NoiseSpec, Scm, ScmMode, ScmParts};
use crate::error::{McboError, Result};
use crate::gp::Kernel;
use crate::graph::{Dag, InterventionTargets, NodeSpec};

pub const TASK_NAMES: &[&str] = &[
    "toygraph",
    "psagraph",
    "dropwave",
    "alpine2",
    "rosenbrock",
    "ackley",
    "chain_synthetic",
    "tree_synthetic",
];

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn scalar_nodes(parents: &[&[usize]], actions: &[&[usize]]) -> Result<Dag> {
    Dag::new(
        parents
            .iter()
            .zip(actions)
            .map(|(p, a)| NodeSpec {
                obs_dim: 1,
                actions: a.to_vec(),
                parents: p.to_vec(),
            })
            .collect(),
    )
}

fn noise_for(dag: &Dag, std: f64) -> Vec<NoiseSpec> {
    (0..dag.num_nodes())
        .map(|i| NoiseSpec::gaussian(std, dag.obs_dim(i)))
        .collect()
}

/// Builds a catalog task. Noisy variants add Gaussian noise of standard
/// deviation 1 at every node (0.1 for `dropwave`); `ackley` is noiseless
/// only. The `seed` is accepted for catalog symmetry; built-in tasks are
/// fully deterministic in their definition.
pub fn make_task(name: &str, noisy: bool, _seed: u64) -> Result<Scm> {
    let noise_std = if !noisy {
        0.0
    } else if name == "dropwave" {
        0.1
    } else {
        1.0
    };
    let rbf = Kernel::rbf;
    let (dag, mechanisms, action_box, mode, hard, kernels) = match name {
        "toygraph" => {
            let dag = Dag::chain(3, &[0, 0, 0])?;
            let mechs = vec![
                Mechanism::scalar("0", |_, _| 0.0),
                Mechanism::scalar("exp(-x0 / 2) + 1", |z, _| (-z[0] / 2.0).exp() + 1.0),
                Mechanism::scalar("cos(x1) - 0.1 x1^2", |z, _| z[0].cos() - 0.1 * z[0] * z[0]),
            ];
            let hard = HardSpec {
                candidates: InterventionTargets::powerset(&[0, 1]),
                value_box: vec![(-2.0, 2.0), (-3.0, 3.0), (0.0, 0.0)],
            };
            (dag, mechs, vec![], ScmMode::Cbo, Some(hard), vec![rbf(1.0, 1.0); 3])
        }
        "psagraph" => {
            let dag = scalar_nodes(
                &[&[], &[0], &[0, 1], &[0, 1], &[0, 1, 2, 3], &[0, 1, 2, 3, 4]],
                &[&[][..]; 6],
            )?;
            let mechs = vec![
                Mechanism::scalar("0", |_, _| 0.0),
                Mechanism::scalar("-0.3 age", |z, _| -0.3 * z[0]),
                Mechanism::scalar("sigmoid(0.5 age + 0.3 bmi)", |z, _| sigmoid(0.5 * z[0] + 0.3 * z[1])),
                Mechanism::scalar("sigmoid(0.6 age + 0.8 bmi)", |z, _| sigmoid(0.6 * z[0] + 0.8 * z[1])),
                Mechanism::scalar(
                    "sigmoid(-0.5 age + 0.1 bmi + 0.2 aspirin - 0.4 statin)",
                    |z, _| sigmoid(-0.5 * z[0] + 0.1 * z[1] + 0.2 * z[2] - 0.4 * z[3]),
                ),
                Mechanism::scalar(
                    "-(0.4 age - 0.3 bmi + 0.8 aspirin - 1.2 statin + cancer)",
                    |z, _| -(0.4 * z[0] - 0.3 * z[1] + 0.8 * z[2] - 1.2 * z[3] + z[4]),
                ),
            ];
            let mut value_box = vec![(0.0, 0.0); 6];
            value_box[2] = (0.0, 1.0);
            value_box[3] = (0.0, 1.0);
            let hard = HardSpec {
                candidates: InterventionTargets::powerset(&[2, 3]),
                value_box,
            };
            (dag, mechs, vec![], ScmMode::Cbo, Some(hard), vec![rbf(1.0, 1.0); 6])
        }
        "dropwave" => {
            let dag = scalar_nodes(&[&[], &[0]], &[&[0, 1], &[]])?;
            let mechs = vec![
                Mechanism::scalar("sqrt(a0^2 + a1^2)", |_, a| (a[0] * a[0] + a[1] * a[1]).sqrt()),
                Mechanism::scalar("(1 + cos(12 x0)) / (2 + 0.5 x0^2)", |z, _| {
                    (1.0 + (12.0 * z[0]).cos()) / (2.0 + 0.5 * z[0] * z[0])
                }),
            ];
            (
                dag,
                mechs,
                vec![(-5.12, 5.12); 2],
                ScmMode::FunctionNetwork,
                None,
                vec![rbf(2.0, 1.0), rbf(0.2, 1.0)],
            )
        }
        "alpine2" => {
            let dag = scalar_nodes(
                &[&[], &[0], &[1], &[2], &[3], &[4]],
                &[&[0], &[1], &[2], &[3], &[4], &[5]],
            )?;
            let mut mechs = vec![Mechanism::scalar("sqrt(a0) sin(a0)", |_, a| a[0].sqrt() * a[0].sin())];
            for i in 1..6 {
                mechs.push(Mechanism::scalar(
                    format!("sqrt(a{i}) sin(a{i}) x{}", i - 1),
                    |z, a| a[0].sqrt() * a[0].sin() * z[0],
                ));
            }
            (
                dag,
                mechs,
                vec![(0.0, 10.0); 6],
                ScmMode::FunctionNetwork,
                None,
                vec![rbf(1.5, 1.0); 6],
            )
        }
        "rosenbrock" => {
            let dag = scalar_nodes(
                &[&[], &[0], &[1], &[2]],
                &[&[0, 1], &[1, 2], &[2, 3], &[3, 4]],
            )?;
            fn term(u: f64, v: f64) -> f64 {
                (100.0 * (v - u * u).powi(2) + (1.0 - u).powi(2)) / 100.0
            }
            let mut mechs = vec![Mechanism::scalar("-r(a0, a1)", |_, a| -term(a[0], a[1]))];
            for i in 1..4 {
                mechs.push(Mechanism::scalar(
                    format!("x{} - r(a{i}, a{})", i - 1, i + 1),
                    |z, a| z[0] - term(a[0], a[1]),
                ));
            }
            (
                dag,
                mechs,
                vec![(-2.0, 2.0); 5],
                ScmMode::FunctionNetwork,
                None,
                vec![rbf(1.0, 1.0); 4],
            )
        }
        "ackley" => {
            if noisy {
                return Err(McboError::Config("ackley has no noisy variant".into()));
            }
            let all: &[usize] = &[0, 1, 2, 3, 4, 5];
            let dag = scalar_nodes(&[&[], &[], &[0, 1]], &[all, all, &[]])?;
            let mechs = vec![
                Mechanism::scalar("mean(a^2)", |_, a| a.iter().map(|v| v * v).sum::<f64>() / 6.0),
                Mechanism::scalar("mean(cos(2 pi a))", |_, a| {
                    a.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / 6.0
                }),
                Mechanism::scalar("20 exp(-0.2 sqrt(x0)) + exp(x1) - 20 - e", |z, _| {
                    20.0 * (-0.2 * z[0].max(0.0).sqrt()).exp() + z[1].exp() - 20.0 - E
                }),
            ];
            (
                dag,
                mechs,
                vec![(-2.0, 2.0); 6],
                ScmMode::FunctionNetwork,
                None,
                vec![rbf(1.0, 1.0), rbf(0.3, 1.0), rbf(1.0, 1.0)],
            )
        }
        "chain_synthetic" => {
            let dag = Dag::chain(3, &[1, 1, 0])?;
            let mechs = vec![
                Mechanism::scalar("sin(2 a0)", |_, a| (2.0 * a[0]).sin()),
                Mechanism::scalar("tanh(1.5 x0 + a1)", |z, a| (1.5 * z[0] + a[0]).tanh()),
                Mechanism::scalar("-(x1 - 0.6)^2 + 0.5 x1", |z, _| {
                    -(z[0] - 0.6).powi(2) + 0.5 * z[0]
                }),
            ];
            (
                dag,
                mechs,
                vec![(-1.0, 1.0); 2],
                ScmMode::Cbo,
                None,
                vec![rbf(0.5, 1.0), rbf(1.0, 1.0), rbf(1.0, 1.0)],
            )
        }
        "tree_synthetic" => {
            let dag = Dag::from_parents(
                &[&[], &[], &[], &[], &[0, 1], &[2, 3], &[4, 5]],
                &[1, 1, 1, 1, 1, 1, 0],
            )?;
            let mut mechs: Vec<Mechanism> = (0..4)
                .map(|i| Mechanism::scalar(format!("sin(3 a{i} + 0.5)"), |_, a| (3.0 * a[0] + 0.5).sin()))
                .collect();
            mechs.push(Mechanism::scalar("0.5 (x0 + x1) - (a4 - 0.5 x0)^2", |z, a| {
                0.5 * (z[0] + z[1]) - (a[0] - 0.5 * z[0]).powi(2)
            }));
            mechs.push(Mechanism::scalar("0.5 (x2 + x3) - (a5 + 0.5 x3)^2", |z, a| {
                0.5 * (z[0] + z[1]) - (a[0] + 0.5 * z[1]).powi(2)
            }));
            mechs.push(Mechanism::scalar("x4 + x5 - 0.5 (x4 - x5)^2", |z, _| {
                z[0] + z[1] - 0.5 * (z[0] - z[1]).powi(2)
            }));
            let mut kernels = vec![rbf(0.5, 1.0); 4];
            kernels.extend([rbf(1.0, 1.0); 3]);
            (dag, mechs, vec![(-1.0, 1.0); 6], ScmMode::Cbo, None, kernels)
        }
        other => return Err(McboError::UnknownTask(other.to_string())),
    };
    let noise = noise_for(&dag, noise_std);
    let suffix = if noisy { "_noisy" } else { "" };
    Scm::new(ScmParts {
        name: format!("{name}{suffix}"),
        dag,
        mechanisms,
        noise,
        action_box,
        cardinality_limit: None,
        mode,
        hard,
        kernels,
    })
}
