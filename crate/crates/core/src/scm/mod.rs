//! Ground-truth structural causal models: simulation, the task catalog and
//! reference oracles.

mod custom;
mod mechanism;
mod model;
mod oracle;
mod rkhs;
mod tasks;

pub use custom::{HardJson, TaskFile, TaskNodeJson};
pub use mechanism::{from_registry, Mechanism, MechanismRef, REGISTRY};
pub use model::{
    expected_reward, simulate, HardSpec, Intervention, NoiseSpec, Sample, Scm, ScmMode, ScmParts,
};
pub use oracle::{combinations, oracle_best, Oracle, DEFAULT_BUDGET, DEFAULT_GRID, DEFAULT_ORACLE_MC};
pub use rkhs::{make_rkhs_task, RkhsFunction, RkhsParams};
pub use tasks::{make_task, TASK_NAMES};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::McboError;
    use crate::graph::{Dag, InterventionTargets};
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `x_i = sum(z) + sum(a)` on a 3-node chain with one action per node.
    fn identity_chain(noise: [f64; 3], with_hard: bool) -> Scm {
        let dag = Dag::chain(3, &[1, 1, 1]).unwrap();
        let sum = Mechanism::scalar("z + a", |z: &[f64], a: &[f64]| {
            z.iter().sum::<f64>() + a.iter().sum::<f64>()
        });
        let hard = HardSpec {
            candidates: InterventionTargets::powerset(&[0, 1]),
            value_box: vec![(-10.0, 10.0); 3],
        };
        Scm::new(ScmParts {
            name: "identity_chain".into(),
            mechanisms: vec![sum.clone(), sum.clone(), sum],
            noise: noise.iter().map(|&s| NoiseSpec::gaussian(s, 1)).collect(),
            action_box: vec![(0.0, 1.0); 3],
            cardinality_limit: None,
            mode: ScmMode::FunctionNetwork,
            hard: with_hard.then_some(hard),
            kernels: vec![],
            dag,
        })
        .unwrap()
    }

    fn soft(a: &[f64]) -> Intervention {
        Intervention::Soft { actions: a.to_vec() }
    }

    fn do_node(node: usize, v: f64) -> Intervention {
        Intervention::hard(InterventionTargets::new([node]), vec![vec![v]])
    }

    #[test]
    fn soft_rollout_of_identity_chain() {
        let scm = identity_chain([0.0; 3], true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = simulate(&scm, &soft(&[1.0, 1.0, 1.0]), &mut rng).unwrap();
        assert_eq!(s.obs, vec![vec![1.0], vec![2.0], vec![3.0]]);
        assert_eq!(s.reward, 3.0);
    }

    #[test]
    fn observational_identity_chain_is_zero() {
        let scm = identity_chain([0.0; 3], true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = simulate(&scm, &Intervention::Observational, &mut rng).unwrap();
        assert_eq!(s.obs, vec![vec![0.0]; 3]);
        assert_eq!(s.reward, 0.0);
    }

    #[test]
    fn hard_clamp_propagates() {
        let scm = identity_chain([0.0; 3], true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = simulate(&scm, &do_node(0, 5.0), &mut rng).unwrap();
        assert_eq!(s.obs, vec![vec![5.0]; 3]);
        assert_eq!(s.reward, 5.0);
    }

    #[test]
    fn errors_on_invalid_interventions() {
        let scm = identity_chain([0.0; 3], true);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            simulate(&scm, &soft(&[2.0, 0.0, 0.0]), &mut rng),
            Err(McboError::ActionOutOfBox { index: 0, .. })
        ));
        let iv = Intervention::hard(InterventionTargets::new([2]), vec![vec![0.0]]);
        assert_eq!(simulate(&scm, &iv, &mut rng), Err(McboError::HardTargetIncludesReward));

        let dag = Dag::chain(2, &[1, 1]).unwrap();
        let capped = Scm::new(ScmParts {
            name: "capped".into(),
            mechanisms: vec![Mechanism::scalar("0", |_, _| 0.0); 2],
            noise: vec![NoiseSpec::None; 2],
            action_box: vec![(-1.0, 1.0); 2],
            cardinality_limit: Some(1),
            mode: ScmMode::FunctionNetwork,
            hard: None,
            kernels: vec![],
            dag,
        })
        .unwrap();
        assert!(matches!(
            simulate(&capped, &soft(&[0.5, 0.5]), &mut rng),
            Err(McboError::CardinalityViolated { active: 2, limit: 1 })
        ));
    }

    #[test]
    fn cbo_mode_rejects_reward_actions() {
        let dag = Dag::chain(2, &[0, 1]).unwrap();
        let res = Scm::new(ScmParts {
            name: "bad".into(),
            mechanisms: vec![Mechanism::scalar("0", |_, _| 0.0); 2],
            noise: vec![NoiseSpec::None; 2],
            action_box: vec![(0.0, 1.0)],
            cardinality_limit: None,
            mode: ScmMode::Cbo,
            hard: None,
            kernels: vec![],
            dag,
        });
        assert!(res.is_err());
    }

    #[test]
    fn expected_reward_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let scm = identity_chain([0.0; 3], true);
        assert_eq!(expected_reward(&scm, &soft(&[1.0, 1.0, 1.0]), 5, &mut rng).unwrap(), 3.0);

        // unit noise everywhere: y ~ N(0, 3), so the MC error is sqrt(3 / n)
        let noisy = identity_chain([1.0; 3], true);
        let n = 4000;
        let est = expected_reward(&noisy, &Intervention::Observational, n, &mut rng).unwrap();
        assert!(est.abs() < 3.0 * (3.0 / n as f64).sqrt(), "estimate {est}");

        let upstream = identity_chain([1.0, 0.0, 0.0], true);
        assert_eq!(expected_reward(&upstream, &do_node(1, 2.0), 50, &mut rng).unwrap(), 2.0);
    }

    #[test]
    fn oracle_finds_box_corner() {
        let scm = identity_chain([0.0; 3], false);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (iv, v) = oracle_best(&scm, 2, 1, &mut rng).unwrap();
        assert_eq!(iv, soft(&[1.0, 1.0, 1.0]));
        assert_eq!(v, 3.0);
    }

    #[test]
    fn oracle_finds_interior_zero() {
        let dag = Dag::chain(2, &[1, 0]).unwrap();
        let scm = Scm::new(ScmParts {
            name: "bowl".into(),
            dag,
            mechanisms: vec![
                Mechanism::scalar("a", |_, a| a[0]),
                Mechanism::scalar("-x0^2", |z, _| -z[0] * z[0]),
            ],
            noise: vec![NoiseSpec::None; 2],
            action_box: vec![(-1.0, 1.0)],
            cardinality_limit: None,
            mode: ScmMode::Cbo,
            hard: None,
            kernels: vec![],
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (iv, v) = oracle_best(&scm, 3, 1, &mut rng).unwrap();
        assert_eq!(iv, soft(&[0.0]));
        assert_eq!(v, 0.0);
    }

    #[test]
    fn oracle_prefers_clamping_the_direct_parent() {
        // X1 = X0 + noise, Y = -(X1 - 1)^2; do(X1 = 1) beats do(X0 = 1) by
        // the noise variance.
        let dag = Dag::chain(3, &[0, 0, 0]).unwrap();
        let scm = Scm::new(ScmParts {
            name: "toy".into(),
            dag,
            mechanisms: vec![
                Mechanism::scalar("0", |_, _| 0.0),
                Mechanism::scalar("x0", |z, _| z[0]),
                Mechanism::scalar("-(x1 - 1)^2", |z, _| -(z[0] - 1.0).powi(2)),
            ],
            noise: vec![NoiseSpec::None, NoiseSpec::gaussian(0.5, 1), NoiseSpec::None],
            action_box: vec![],
            cardinality_limit: None,
            mode: ScmMode::Cbo,
            hard: Some(HardSpec {
                candidates: InterventionTargets::powerset(&[0, 1]),
                value_box: vec![(-2.0, 2.0), (-2.0, 2.0), (0.0, 0.0)],
            }),
            kernels: vec![],
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (iv, v) = oracle_best(&scm, 5, 500, &mut rng).unwrap();
        assert_eq!(iv, do_node(1, 1.0));
        assert_relative_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn grid_budget_is_enforced() {
        let scm = make_task("tree_synthetic", false, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let res = Oracle::new(&scm, 1, &mut rng).with_budget(1000).best(25);
        assert!(matches!(res, Err(McboError::GridBudgetExceeded { .. })));
    }

    #[test]
    fn same_seed_same_sample() {
        let scm = identity_chain([1.0; 3], true);
        let a = simulate(&scm, &soft(&[0.2, 0.3, 0.4]), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = simulate(&scm, &soft(&[0.2, 0.3, 0.4]), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn observational_equals_zero_soft() {
        let scm = identity_chain([1.0; 3], true);
        for seed in 0..20 {
            let a = simulate(&scm, &Intervention::Observational, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let b = simulate(&scm, &soft(&[0.0; 3]), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn clamped_node_ignores_upstream_noise() {
        let scm = identity_chain([1.0; 3], true);
        for seed in 0..50 {
            let s = simulate(&scm, &do_node(1, 0.7), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(s.obs[1], vec![0.7]);
        }
    }

    /// Standard error of the MC estimate shrinks like `n^-1/2`.
    #[test]
    fn monte_carlo_error_rate() {
        let scm = identity_chain([1.0; 3], true);
        let ns: Vec<usize> = (0..10).map(|k| 25 << k).collect();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for &n in &ns {
            let reps: Vec<f64> = (0..10)
                .map(|_| expected_reward(&scm, &Intervention::Observational, n, &mut rng).unwrap())
                .collect();
            let mean = reps.iter().sum::<f64>() / 10.0;
            let sd = (reps.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / 9.0).sqrt();
            xs.push((n as f64).ln());
            ys.push(sd.ln());
        }
        let k = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / k;
        let my = ys.iter().sum::<f64>() / k;
        let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
    }
}
