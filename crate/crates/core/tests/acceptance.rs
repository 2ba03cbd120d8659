//! End-to-end acceptance checks. Runs as a plain binary so every check
//! prints its own PASS/FAIL line under `cargo test`.

use std::time::{Duration, Instant};

use mcbo::acquisition::{AcqConfig, CausalStructure, EtaKind, EtaNet, EtaParam, InputScaling, PlausibleModel};
use mcbo::engine::{self, Algo, OracleConfig, RunConfig, RunResult};
use mcbo::experiment::{run_experiment, ExperimentSpec};
use mcbo::gp::{fit, GpDataset, GpPosterior, Kernel};
use mcbo::graph::{Dag, InterventionTargets, NodeSpec};
use mcbo::metrics::median;
use mcbo::scm::{make_rkhs_task, make_task, Intervention, NoiseSpec, RkhsParams, Scm};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let pass = out.pass && took < limit;
    println!(
        "[{id:>2}] {} {name}: {} ({:.1}s, limit {}s)",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

// ---------------------------------------------------------------------------
// GP against a dense inverse

fn dense_oracle(kernel: &Kernel, data: &GpDataset, d: usize, s: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = data.inputs.len();
    let k = DMatrix::from_fn(n, n, |i, j| {
        kernel.base(&data.inputs[i], &data.inputs[j]) + if i == j { data.noise_var } else { 0.0 }
    });
    let kinv = k.try_inverse().expect("invertible gram");
    let kstar = DVector::from_fn(n, |i, _| kernel.base(&data.inputs[i], s));
    let w = &kinv * &kstar;
    let prior = kernel.base(s, s);
    let var = prior - kstar.dot(&w);
    let mean = (0..d)
        .map(|l| {
            let y = DVector::from_fn(n, |i, _| data.outputs[i][l]);
            w.dot(&y)
        })
        .collect();
    (mean, vec![var.max(0.0); d])
}

fn gp_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=20);
        let p = rng.gen_range(1..=2);
        let d = rng.gen_range(1..=2);
        let kernel = if rng.gen_bool(0.8) {
            Kernel::rbf(rng.gen_range(0.3..2.0), rng.gen_range(0.5..1.0))
        } else {
            Kernel::linear(rng.gen_range(0.5..1.0))
        };
        let mut data = GpDataset::new(rng.gen_range(1e-3..1.0));
        for _ in 0..n {
            let x = uniform(&mut rng, p, -2.0, 2.0);
            let y = uniform(&mut rng, d, -1.5, 1.5);
            data.push(x, y);
        }
        let gp = fit(kernel, data.clone(), p, d).expect("fit");
        for _ in 0..10 {
            let s = uniform(&mut rng, p, -2.5, 2.5);
            let (m0, v0) = dense_oracle(&kernel, &data, d, &s);
            let m = gp.mean(&s).unwrap();
            let v = gp.var(&s).unwrap();
            for l in 0..d {
                worst = worst.max((m[l] - m0[l]).abs()).max((v[l] - v0[l]).abs());
            }
        }
    }
    Outcome {
        pass: worst < 1e-8,
        detail: format!("max abs deviation {worst:.2e} over 100 datasets"),
    }
}

// ---------------------------------------------------------------------------
// Analytic acquisition gradients against central differences

struct GradCase {
    structure: CausalStructure,
    gps: Vec<GpPosterior>,
    beta: f64,
    etas: Vec<EtaParam>,
    iv: Intervention,
    draws: Vec<Vec<Vec<f64>>>,
}

fn random_case(rng: &mut ChaCha8Rng) -> GradCase {
    let n = rng.gen_range(2..=4);
    let hard = rng.gen_bool(0.25);
    let mut nodes = Vec::with_capacity(n);
    let mut slot = 0;
    for i in 0..n {
        let mut parents: Vec<usize> = (0..i).filter(|_| rng.gen_bool(0.6)).collect();
        if i == n - 1 && parents.is_empty() {
            parents.push(i - 1);
        }
        let obs_dim = if i == n - 1 { 1 } else { rng.gen_range(1..=2) };
        let n_act = if hard {
            0
        } else if i == 0 {
            rng.gen_range(1..=2)
        } else {
            rng.gen_range(0..=2)
        };
        let actions = (slot..slot + n_act).collect();
        slot += n_act;
        nodes.push(NodeSpec {
            obs_dim,
            actions,
            parents,
        });
    }
    let dag = Dag::new(nodes).expect("valid dag");
    let noise_std = if rng.gen_bool(0.5) { rng.gen_range(0.1..0.5) } else { 0.0 };
    let gps: Vec<GpPosterior> = (0..n)
        .map(|i| {
            let p = dag.input_dim(i);
            let d = dag.obs_dim(i);
            let w: Vec<Vec<f64>> = (0..d).map(|_| uniform(rng, p, -1.5, 1.5)).collect();
            let mut data = GpDataset::new(rng.gen_range(0.01..0.3));
            for _ in 0..rng.gen_range(3..=8) {
                let x = uniform(rng, p, -1.5, 1.5);
                let y = w
                    .iter()
                    .map(|wl| (wl.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() + 0.3).sin())
                    .collect();
                data.push(x, y);
            }
            fit(Kernel::rbf(rng.gen_range(0.5..1.5), 1.0), data, p, d).expect("fit")
        })
        .collect();
    let etas = (0..n)
        .map(|i| {
            let (p, d) = (dag.input_dim(i), dag.obs_dim(i));
            if p == 0 || rng.gen_bool(0.5) {
                EtaParam::constant(uniform(rng, d, -0.9, 0.9))
            } else {
                let scaling = InputScaling::from_data(&gps[i].data().inputs, p);
                EtaParam::TwoLayerNet(EtaNet::random(p, 5, d, scaling, rng))
            }
        })
        .collect();
    let iv = if hard {
        let t = rng.gen_range(0..n - 1);
        Intervention::hard(InterventionTargets::new([t]), vec![uniform(rng, dag.obs_dim(t), -1.0, 1.0)])
    } else {
        Intervention::Soft {
            actions: uniform(rng, dag.num_actions(), -1.0, 1.0),
        }
    };
    let structure = CausalStructure {
        noise: (0..n).map(|i| NoiseSpec::gaussian(noise_std, dag.obs_dim(i))).collect(),
        action_box: vec![(-1.0, 1.0); dag.num_actions()],
        cardinality_limit: None,
        hard: None,
        minimal_targets: vec![],
        dag,
    };
    let draws = structure.draws(4, rng);
    GradCase {
        structure,
        gps,
        beta: rng.gen_range(0.1..3.0),
        etas,
        iv,
        draws,
    }
}

fn gradient_check() -> Outcome {
    const H: f64 = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let (mut checked, mut bad) = (0usize, 0usize);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let case = random_case(&mut rng);
        let model = PlausibleModel::new(&case.structure, &case.gps, case.beta).expect("model");
        let g = model.value_and_grad(&case.etas, &case.iv, &case.draws).expect("grad");
        let f = |etas: &[EtaParam], iv: &Intervention| model.value(etas, iv, &case.draws).unwrap();
        let mut compare = |analytic: f64, plus: f64, minus: f64| {
            let numeric = (plus - minus) / (2.0 * H);
            if analytic.abs() > 1e-6 || numeric.abs() > 1e-6 {
                let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs());
                checked += 1;
                worst = worst.max(rel);
                if rel >= 1e-4 {
                    bad += 1;
                }
            }
        };
        match &case.iv {
            Intervention::Soft { actions } => {
                for k in 0..actions.len() {
                    let mut up = actions.clone();
                    let mut dn = actions.clone();
                    up[k] += H;
                    dn[k] -= H;
                    compare(
                        g.actions[k],
                        f(&case.etas, &Intervention::Soft { actions: up }),
                        f(&case.etas, &Intervention::Soft { actions: dn }),
                    );
                }
            }
            Intervention::Hard { targets, values } => {
                for (t, v) in values.iter().enumerate() {
                    for l in 0..v.len() {
                        let shift = |h: f64| {
                            let mut vals = values.clone();
                            vals[t][l] += h;
                            Intervention::hard(targets.clone(), vals)
                        };
                        compare(g.clamps[t][l], f(&case.etas, &shift(H)), f(&case.etas, &shift(-H)));
                    }
                }
            }
            Intervention::Observational => {}
        }
        for i in 0..case.etas.len() {
            let theta = case.etas[i].params();
            for k in 0..theta.len() {
                let shifted = |h: f64| {
                    let mut etas = case.etas.clone();
                    let mut th = theta.clone();
                    th[k] += h;
                    etas[i].set_params(&th);
                    etas
                };
                compare(g.etas[i][k], f(&shifted(H), &case.iv), f(&shifted(-H), &case.iv));
            }
        }
    }
    Outcome {
        pass: bad == 0 && checked > 0,
        detail: format!("{bad}/{checked} entries above 1e-4, worst relative error {worst:.2e}"),
    }
}

// ---------------------------------------------------------------------------
// Shared RKHS chain setup

fn rkhs_params(noise_std: f64) -> RkhsParams {
    RkhsParams {
        kernel: Kernel::rbf(0.5, 1.0),
        n_centers: 8,
        norm_bound: 2.0,
        action_box: (-1.0, 1.0),
        z_box: (-2.0, 2.0),
        noise_std,
        ..RkhsParams::default()
    }
}

fn rkhs_chain(seed: u64, noise_std: f64) -> Scm {
    let dag = Dag::chain(3, &[1, 1, 0]).unwrap();
    make_rkhs_task(&dag, &rkhs_params(noise_std), seed).unwrap()
}

/// Node inputs drawn from the box the mechanisms were built on.
fn random_input(scm: &Scm, i: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let p = rkhs_params(0.0);
    let dag = scm.dag();
    let mut s = uniform(rng, dag.parent_dim(i), p.z_box.0, p.z_box.1);
    s.extend(uniform(rng, dag.node(i).action_dim(), p.action_box.0, p.action_box.1));
    s
}

/// `1/2 ln det(I + K / rho^2)` of a fitted posterior's data.
fn data_info_gain(gp: &GpPosterior) -> f64 {
    let data = gp.data();
    let n = data.inputs.len();
    let m = DMatrix::from_fn(n, n, |i, j| {
        gp.kernel().base(&data.inputs[i], &data.inputs[j]) / data.noise_var + if i == j { 1.0 } else { 0.0 }
    });
    let chol = m.cholesky().expect("positive definite");
    gp.out_dim() as f64 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
}

fn calibrated_beta(bound: f64, gamma: f64, delta: f64) -> f64 {
    bound + (2.0 * (gamma + 1.0 + (1.0 / delta).ln())).sqrt()
}

/// Fits one GP per node from `n` random soft interventions.
fn fit_chain(scm: &Scm, n: usize, rng: &mut ChaCha8Rng) -> Vec<GpPosterior> {
    let dag = scm.dag();
    let noise_var = engine::node_noise_vars(scm);
    let mut data: Vec<GpDataset> = noise_var.iter().map(|&v| GpDataset::new(v)).collect();
    for _ in 0..n {
        let actions = uniform(rng, scm.num_actions(), -1.0, 1.0);
        let iv = Intervention::Soft { actions: actions.clone() };
        let s = mcbo::scm::simulate(scm, &iv, rng).unwrap();
        for (i, d) in data.iter_mut().enumerate() {
            let mut x = scm.gather_parents(i, &s.obs);
            x.extend(scm.gather_actions(i, &actions));
            d.push(x, s.obs[i].clone());
        }
    }
    data.into_iter()
        .enumerate()
        .map(|(i, d)| fit(scm.kernels()[i], d, dag.input_dim(i), dag.obs_dim(i)).unwrap())
        .collect()
}

// ---------------------------------------------------------------------------
// Optimism construction on noiseless chains

fn optimism_construction() -> Outcome {
    let (mut qualifying, mut reproduced, mut dominated, mut worst) = (0, 0, 0, 0.0f64);
    let mut tried = 0;
    for seed in 0..10u64 {
        let scm = rkhs_chain(seed, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let gps = fit_chain(&scm, 15, &mut rng);
        let gamma: f64 = gps.iter().map(data_info_gain).sum();
        let beta = calibrated_beta(2.0, gamma, 0.05);
        let dag = scm.dag();
        tried += 1;
        let inside = (0..200).all(|k| {
            let i = k % dag.num_nodes();
            let s = random_input(&scm, i, &mut rng);
            let truth = scm.mechanisms()[i].eval(&s[..dag.parent_dim(i)], &s[dag.parent_dim(i)..]);
            let (lo, hi) = gps[i].confidence_bounds(&s, beta).unwrap();
            truth.iter().zip(lo.iter().zip(&hi)).all(|(f, (l, h))| l <= f && f <= h)
        });
        if !inside {
            continue;
        }
        qualifying += 1;
        let structure = CausalStructure::from_scm(&scm);
        let model = PlausibleModel::new(&structure, &gps, beta).unwrap();
        let zero = structure.zero_draw();
        let mut all_ok = true;
        for _ in 0..50 {
            let actions = uniform(&mut rng, scm.num_actions(), -1.0, 1.0);
            let iv = Intervention::Soft { actions: actions.clone() };
            let truth = scm.simulate_with_noise(&iv, &zero).unwrap();
            // eta_i(s) = (f_i(s) - mu_i(s)) / (beta sigma_i(s)) read off along the true trajectory
            let etas: Vec<EtaParam> = (0..dag.num_nodes())
                .map(|i| {
                    let mut s = scm.gather_parents(i, &truth.obs);
                    s.extend(scm.gather_actions(i, &actions));
                    let mu = gps[i].mean(&s).unwrap();
                    let var = gps[i].var(&s).unwrap();
                    let eta: Vec<f64> = (0..mu.len())
                        .map(|l| (truth.obs[i][l] - mu[l]) / (beta * var[l].sqrt()))
                        .collect();
                    if eta.iter().any(|e| e.abs() > 1.0) {
                        all_ok = false;
                    }
                    EtaParam::constant(eta)
                })
                .collect();
            let value = model.value(&etas, &iv, std::slice::from_ref(&zero)).unwrap();
            let err = (value - truth.reward).abs();
            worst = worst.max(err);
            all_ok &= err < 1e-6;
            if value >= truth.reward - 1e-6 {
                dominated += 1;
            }
        }
        if all_ok {
            reproduced += 1;
        }
    }
    Outcome {
        pass: qualifying > 0 && reproduced == qualifying && dominated == 50 * qualifying,
        detail: format!(
            "{qualifying}/{tried} tasks inside bounds, {reproduced} reproduced, worst reward error {worst:.2e}"
        ),
    }
}

// ---------------------------------------------------------------------------
// Calibration

fn calibration() -> Outcome {
    let covered: Vec<(usize, usize)> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let scm = rkhs_chain(1000 + seed, 0.1);
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let gps = fit_chain(&scm, 20, &mut rng);
            let dag = scm.dag();
            let mut hits = 0;
            let mut total = 0;
            for (i, gp) in gps.iter().enumerate() {
                let beta = calibrated_beta(2.0, data_info_gain(gp), 0.05);
                let queries = 200 / dag.num_nodes() + usize::from(i < 200 % dag.num_nodes());
                for _ in 0..queries {
                    let s = random_input(&scm, i, &mut rng);
                    let truth = scm.mechanisms()[i].eval(&s[..dag.parent_dim(i)], &s[dag.parent_dim(i)..]);
                    let (lo, hi) = gp.confidence_bounds(&s, beta).unwrap();
                    for l in 0..truth.len() {
                        total += 1;
                        if lo[l] <= truth[l] && truth[l] <= hi[l] {
                            hits += 1;
                        }
                    }
                }
            }
            (hits, total)
        })
        .collect();
    let hits: usize = covered.iter().map(|c| c.0).sum();
    let total: usize = covered.iter().map(|c| c.1).sum();
    let rate = hits as f64 / total as f64;
    Outcome {
        pass: rate >= 0.95 && total == 4000,
        detail: format!("coverage {rate:.4} over {total} queries"),
    }
}

// ---------------------------------------------------------------------------
// Runs on the RKHS chain

fn chain_config(seed: u64) -> RunConfig {
    let mut cfg = RunConfig {
        task: "rkhs_chain".into(),
        algo: Algo::Mcbo,
        beta: 0.5,
        rounds: 100,
        seed,
        task_seed: seed,
        oracle: OracleConfig {
            grid: 101,
            ..OracleConfig::default()
        },
        ..RunConfig::default()
    };
    cfg.rkhs.params = rkhs_params(0.0);
    cfg
}

fn chain_runs() -> Vec<(RunResult, f64)> {
    (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let r = engine::run(&chain_config(seed)).expect("chain run");
            let opt = r.optimum;
            (r, opt)
        })
        .collect()
}

fn average_regret(r: &RunResult, opt: f64, t: usize) -> f64 {
    let rewards = r.expected_rewards();
    opt - rewards[..t].iter().sum::<f64>() / t as f64
}

fn regret_decrease(runs: &[(RunResult, f64)]) -> Outcome {
    let at10: Vec<f64> = runs.iter().map(|(r, o)| average_regret(r, *o, 10)).collect();
    let at100: Vec<f64> = runs.iter().map(|(r, o)| average_regret(r, *o, 100)).collect();
    let (m10, m100) = (median(&at10), median(&at100));
    Outcome {
        pass: m100 < 0.5 * m10,
        detail: format!("median average regret {m10:.4} at T=10, {m100:.4} at T=100"),
    }
}

fn info_gain_shrinks(runs: &[(RunResult, f64)]) -> Outcome {
    let mut monotone = 0;
    let mut shrinking = 0;
    for (r, _) in runs {
        let curve = r.info_gain_curve();
        if curve.windows(2).all(|w| w[1] >= w[0]) {
            monotone += 1;
        }
        let inc: Vec<f64> = r.records.iter().map(|x| x.info_gain).collect();
        let k = (inc.len() / 10).max(1);
        let first = inc[..k].iter().sum::<f64>() / k as f64;
        let last = inc[inc.len() - k..].iter().sum::<f64>() / k as f64;
        if last < first {
            shrinking += 1;
        }
    }
    let n = runs.len();
    Outcome {
        pass: monotone == n && shrinking == n,
        detail: format!("{monotone}/{n} nondecreasing, {shrinking}/{n} with shrinking increments"),
    }
}

// ---------------------------------------------------------------------------
// Structure advantage on tree_synthetic

fn reduced_acq(restarts: usize, grad_steps: usize, raw: usize) -> AcqConfig {
    AcqConfig {
        restarts,
        grad_steps,
        raw_candidates: raw,
        ..AcqConfig::default()
    }
}

fn structure_advantage() -> Outcome {
    let scm = make_task("tree_synthetic", false, 0).unwrap();
    let optimum = engine::reference_optimum(
        &scm,
        &OracleConfig {
            grid: 9,
            ..OracleConfig::default()
        },
    )
    .unwrap();
    let final_avg = |algo: Algo| -> Vec<f64> {
        (0..20u64)
            .into_par_iter()
            .map(|seed| {
                let cfg = RunConfig {
                    task: "tree_synthetic".into(),
                    algo,
                    beta: 0.5,
                    rounds: 100,
                    seed,
                    acq: reduced_acq(3, 40, 40),
                    ..RunConfig::default()
                };
                let r = engine::run_with_optimum(&scm, &cfg, Some(&optimum)).unwrap();
                r.expected_rewards().iter().sum::<f64>() / cfg.rounds as f64
            })
            .collect()
    };
    let mcbo = median(&final_avg(Algo::Mcbo));
    let ucb = median(&final_avg(Algo::UcbBaseline));
    Outcome {
        pass: mcbo > ucb,
        detail: format!("median final average reward mcbo {mcbo:.4}, ucb {ucb:.4}, gap {:.4}", mcbo - ucb),
    }
}

// ---------------------------------------------------------------------------
// Hard-intervention target identification

fn target_identification() -> Outcome {
    let scm = make_task("toygraph", true, 0).unwrap();
    let (best_iv, _) = engine::reference_optimum(&scm, &OracleConfig::default()).unwrap();
    let best = best_iv.targets();
    let fractions: Vec<f64> = (0..20u64)
        .into_par_iter()
        .map(|seed| {
            let mut acq = reduced_acq(2, 25, 20);
            acq.eta = EtaKind::Auto;
            let cfg = RunConfig {
                task: "toygraph".into(),
                noisy: true,
                algo: Algo::McboHard,
                beta: 0.5,
                rounds: 100,
                seed,
                acq,
                ..RunConfig::default()
            };
            let r = engine::run_with_optimum(&scm, &cfg, None).unwrap();
            let tail = &r.records[r.records.len() - 25..];
            tail.iter().filter(|x| x.intervention.targets() == best).count() as f64 / 25.0
        })
        .collect();
    let m = median(&fractions);
    Outcome {
        pass: m > 0.5,
        detail: format!("oracle target {:?}, median share of last 25 rounds {m:.2}", best.0),
    }
}

// ---------------------------------------------------------------------------
// Minimal intervention sets

fn minimal_sets() -> Outcome {
    let sets = |name: &str| make_task(name, false, 0).unwrap().minimal_targets();
    let t = |v: &[usize]| InterventionTargets::new(v.iter().copied());
    let toy = sets("toygraph");
    let psa = sets("psagraph");
    let toy_ok = toy == vec![t(&[]), t(&[0]), t(&[1])];
    let psa_ok = psa == vec![t(&[]), t(&[2]), t(&[3]), t(&[2, 3])];
    let show = |v: &[InterventionTargets]| v.iter().map(|s| format!("{:?}", s.0)).collect::<Vec<_>>().join(" ");
    Outcome {
        pass: toy_ok && psa_ok,
        detail: format!("toygraph [{}], psagraph [{}]", show(&toy), show(&psa)),
    }
}

// ---------------------------------------------------------------------------
// Byte-identical reruns

fn determinism() -> Outcome {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut acq = reduced_acq(2, 20, 20);
    acq.n_mc = 8;
    let runs = vec![
        RunConfig {
            task: "toygraph".into(),
            noisy: true,
            algo: Algo::McboHard,
            rounds: 5,
            acq: acq.clone(),
            ..RunConfig::default()
        },
        RunConfig {
            task: "chain_synthetic".into(),
            noisy: true,
            algo: Algo::Mcbo,
            rounds: 5,
            acq,
            ..RunConfig::default()
        },
    ];
    for d in &dirs {
        let spec = ExperimentSpec {
            runs: runs.clone(),
            num_seeds: 2,
            master_seed: 9,
            output_dir: d.path().to_path_buf(),
            ..ExperimentSpec::default()
        };
        run_experiment(&spec).unwrap();
    }
    let csvs = |dir: &std::path::Path| {
        let mut files: Vec<_> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        files
    };
    let a = csvs(dirs[0].path());
    let b = csvs(dirs[1].path());
    let names = |v: &[std::path::PathBuf]| v.iter().map(|p| p.file_name().unwrap().to_owned()).collect::<Vec<_>>();
    let same_names = names(&a) == names(&b);
    let identical = same_names && a.iter().zip(&b).all(|(x, y)| std::fs::read(x).unwrap() == std::fs::read(y).unwrap());
    Outcome {
        pass: identical && !a.is_empty(),
        detail: format!("{} CSV files compared, identical: {identical}", a.len()),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let mut ok = true;
    ok &= check(1, "GP oracle equivalence", secs(10), gp_oracle);
    ok &= check(2, "gradient correctness", secs(60), gradient_check);
    ok &= check(3, "optimism construction", secs(60), optimism_construction);
    ok &= check(4, "calibration", secs(120), calibration);

    // criterion 5 runs the chain experiment; criterion 10 reuses its runs
    let mut runs = Vec::new();
    ok &= check(5, "regret decrease", secs(600), || {
        runs = chain_runs();
        regret_decrease(&runs)
    });
    ok &= check(6, "structure advantage", secs(1200), structure_advantage);
    ok &= check(7, "hard target identification", secs(600), target_identification);
    ok &= check(8, "minimal intervention sets", secs(1), minimal_sets);
    ok &= check(9, "determinism", secs(60), determinism);
    ok &= check(10, "info-gain diagnostic", secs(600), || info_gain_shrinks(&runs));
    if !ok {
        std::process::exit(1);
    }
}
