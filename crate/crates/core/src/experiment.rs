//! Batch experiments: config files, seed sweeps, beta sweeps and
//! deterministic output files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{reference_optimum, resolve_task, run_with_optimum, Algo, RunConfig, RunResult};
use crate::error::{McboError, Result};
use crate::metrics::{
    aggregate_seeds, average_reward, average_reward_sum, best_reward, cumulative_regret, info_gain, Curve,
};

/// Betas tried by [`sweep_beta`] when none are given.
pub const DEFAULT_BETAS: [f64; 3] = [0.05, 0.5, 5.0];

pub const CSV_HEADER: &str =
    "round,seed,intervention,expected_reward,observed_reward,cum_regret,avg_reward,avg_reward_sum,best_reward,info_gain,acq_value,wall_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Emit {
    #[default]
    Csv,
    Json,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentSpec {
    pub runs: Vec<RunConfig>,
    /// Explicit seeds; when empty, `num_seeds` seeds are derived from
    /// `master_seed`.
    pub seeds: Vec<u64>,
    pub num_seeds: usize,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    pub emit: Emit,
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            runs: vec![RunConfig::default()],
            seeds: vec![],
            num_seeds: 1,
            master_seed: 0,
            output_dir: PathBuf::from("results"),
            emit: Emit::Csv,
            jobs: 0,
        }
    }
}

impl ExperimentSpec {
    /// Reads a JSON or TOML file, chosen by extension.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| McboError::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| McboError::Config(format!("{}: {e}", path.display())))
        } else {
            serde_json::from_str(&text).map_err(|e| McboError::Config(format!("{}: {e}", path.display())))
        }
    }

    /// Seed list with duplicates removed, first occurrence kept.
    pub fn resolved_seeds(&self) -> Vec<u64> {
        if !self.seeds.is_empty() {
            let mut seen = BTreeSet::new();
            return self.seeds.iter().copied().filter(|s| seen.insert(*s)).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(self.num_seeds);
        while out.len() < self.num_seeds.max(1) {
            let s = rng.gen::<u32>() as u64;
            if seen.insert(s) {
                out.push(s);
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs.is_empty() {
            return Err(McboError::Config("experiment has no runs".into()));
        }
        self.runs.iter().try_for_each(|r| r.validate())
    }
}

/// Hex SHA-256 of `blob <len>\0<content>`, the git object hashing scheme.
pub fn content_hash(content: &str) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", content.len()).as_bytes());
    h.update(content.as_bytes());
    hex::encode(h.finalize())
}

/// Hash of the fully resolved spec (seeds expanded).
pub fn config_hash(spec: &ExperimentSpec) -> String {
    let mut resolved = spec.clone();
    resolved.seeds = spec.resolved_seeds();
    content_hash(&serde_json::to_string(&resolved).expect("spec serializes"))
}

fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Curves of one finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunCurves {
    pub cum_regret: Curve,
    pub avg_reward: Curve,
    pub avg_reward_sum: Curve,
    pub best_reward: Curve,
    pub info_gain: Curve,
}

impl RunCurves {
    pub fn of(result: &RunResult) -> Self {
        Self {
            cum_regret: cumulative_regret(&result.records, result.optimum),
            avg_reward: average_reward(&result.records),
            avg_reward_sum: average_reward_sum(&result.records),
            best_reward: best_reward(&result.records),
            info_gain: info_gain(&result.records),
        }
    }
}

/// Per-round CSV of one run.
pub fn run_csv(result: &RunResult, seed: u64) -> String {
    let c = RunCurves::of(result);
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (k, r) in result.records.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            seed,
            csv_quote(&r.intervention.to_compact_json()),
            fmt_num(r.expected_reward),
            fmt_num(r.sample.reward),
            fmt_num(c.cum_regret.values[k]),
            fmt_num(c.avg_reward.values[k]),
            fmt_num(c.avg_reward_sum.values[k]),
            fmt_num(c.best_reward.values[k]),
            fmt_num(c.info_gain.values[k]),
            fmt_num(r.acq_value),
            r.wall_ms
        );
    }
    out
}

/// Mean and standard-error curves across seeds.
pub fn aggregate_csv(results: &[&RunResult]) -> Result<String> {
    let curves: Vec<RunCurves> = results.iter().map(|r| RunCurves::of(r)).collect();
    let pick = |f: fn(&RunCurves) -> &Curve| -> Result<(Curve, Curve)> {
        aggregate_seeds(&curves.iter().map(|c| f(c).clone()).collect::<Vec<_>>())
    };
    let cols = [
        ("cum_regret", pick(|c| &c.cum_regret)?),
        ("avg_reward", pick(|c| &c.avg_reward)?),
        ("avg_reward_sum", pick(|c| &c.avg_reward_sum)?),
        ("best_reward", pick(|c| &c.best_reward)?),
        ("info_gain", pick(|c| &c.info_gain)?),
    ];
    let mut out = String::from("round,n_seeds");
    for (name, _) in &cols {
        let _ = write!(out, ",{name}_mean,{name}_stderr");
    }
    out.push('\n');
    let len = cols[0].1 .0.len();
    for t in 0..len {
        let _ = write!(out, "{},{}", t + 1, results.len());
        for (_, (m, s)) in &cols {
            let _ = write!(out, ",{},{}", fmt_num(m.values[t]), fmt_num(s.values[t]));
        }
        out.push('\n');
    }
    Ok(out)
}

/// File-name stem of run `index`.
pub fn run_label(index: usize, cfg: &RunConfig) -> String {
    let algo = match cfg.algo {
        Algo::Mcbo => "mcbo",
        Algo::McboHard => "mcbo_hard",
        Algo::UcbBaseline => "ucb_baseline",
    };
    let task = match &cfg.task_file {
        Some(p) => p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        None => cfg.task.clone(),
    };
    let noisy = if cfg.noisy { "_noisy" } else { "" };
    format!("{index:02}_{task}{noisy}_{algo}_beta{}", cfg.beta)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub label: String,
    pub config: RunConfig,
    pub task_description: String,
    pub task_hash: String,
    pub optimum: Option<f64>,
    pub seeds: Vec<u64>,
    pub files: Vec<String>,
    pub failures: BTreeMap<u64, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub spec: ExperimentSpec,
    pub runs: Vec<RunManifest>,
    pub partial: bool,
    pub wall_clock_ms: u64,
}

/// Finished runs of an experiment, kept for summaries.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub manifest: Manifest,
    /// `results[run][seed]`; `None` where the run failed.
    pub results: Vec<Vec<Option<RunResult>>>,
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.manifest.runs.iter().map(|r| r.failures.len()).sum()
    }
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<String> {
    fs::write(dir.join(name), content).map_err(|e| McboError::Config(format!("{name}: {e}")))?;
    Ok(name.to_string())
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| McboError::Config(format!("thread pool: {e}")))
}

/// Runs every `(run, seed)` pair and writes per-run CSVs, aggregate CSVs
/// and `manifest.json` into the output directory.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let start = Instant::now();
    let seeds = spec.resolved_seeds();
    let dir = &spec.output_dir;
    fs::create_dir_all(dir).map_err(|e| McboError::Config(format!("{}: {e}", dir.display())))?;

    // task construction and the reference optimum are shared by all seeds
    let prepared: Vec<Result<(crate::scm::Scm, crate::engine::Optimum)>> = spec
        .runs
        .iter()
        .map(|cfg| {
            let scm = resolve_task(cfg)?;
            let opt = reference_optimum(&scm, &cfg.oracle)?;
            Ok((scm, opt))
        })
        .collect();
    let jobs: Vec<(usize, usize)> = (0..spec.runs.len())
        .flat_map(|r| (0..seeds.len()).map(move |s| (r, s)))
        .collect();
    let exec = || -> Vec<Result<RunResult>> {
        jobs.par_iter()
            .map(|&(r, s)| {
                let (scm, opt) = prepared[r].as_ref().map_err(|e| e.clone())?;
                let cfg = RunConfig {
                    seed: seeds[s],
                    ..spec.runs[r].clone()
                };
                run_with_optimum(scm, &cfg, Some(opt))
            })
            .collect()
    };
    let outcomes = if spec.jobs > 0 { thread_pool(spec.jobs)?.install(exec) } else { exec() };

    let mut results: Vec<Vec<Option<RunResult>>> = vec![vec![None; seeds.len()]; spec.runs.len()];
    let mut runs = Vec::with_capacity(spec.runs.len());
    for (r, cfg) in spec.runs.iter().enumerate() {
        let label = run_label(r, cfg);
        let (desc, opt) = match &prepared[r] {
            Ok((scm, o)) => (scm.describe(), Some(o.1)),
            Err(e) => (format!("unavailable: {e}"), None),
        };
        runs.push(RunManifest {
            label,
            config: cfg.clone(),
            task_hash: content_hash(&desc),
            task_description: desc,
            optimum: opt,
            seeds: seeds.clone(),
            files: vec![],
            failures: BTreeMap::new(),
        });
    }
    for (&(r, s), outcome) in jobs.iter().zip(outcomes) {
        let seed = seeds[s];
        match outcome {
            Ok(res) => {
                let stem = format!("{}_seed{seed}", runs[r].label);
                if matches!(spec.emit, Emit::Csv | Emit::Both) {
                    let f = write_file(dir, &format!("{stem}.csv"), &run_csv(&res, seed))?;
                    runs[r].files.push(f);
                }
                if matches!(spec.emit, Emit::Json | Emit::Both) {
                    let json = serde_json::to_string_pretty(&res.records).expect("records serialize");
                    let f = write_file(dir, &format!("{stem}.json"), &json)?;
                    runs[r].files.push(f);
                }
                results[r][s] = Some(res);
            }
            Err(e) => {
                runs[r].failures.insert(seed, e.to_string());
            }
        }
    }
    for (r, run) in runs.iter_mut().enumerate() {
        let done: Vec<&RunResult> = results[r].iter().flatten().collect();
        if !done.is_empty() {
            let f = write_file(dir, &format!("{}_aggregate.csv", run.label), &aggregate_csv(&done)?)?;
            run.files.push(f);
        }
    }
    let partial = runs.iter().any(|r| !r.failures.is_empty());
    let mut resolved = spec.clone();
    resolved.seeds = seeds;
    let manifest = Manifest {
        config_hash: config_hash(spec),
        spec: resolved,
        runs,
        partial,
        wall_clock_ms: start.elapsed().as_millis() as u64,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(dir, "manifest.json", &json)?;
    Ok(ExperimentReport { manifest, results })
}

/// Final-round means of one `(task, beta)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub task: String,
    pub algo: Algo,
    pub beta: f64,
    pub avg_reward: f64,
    pub best_reward: f64,
    pub cum_regret: f64,
}

/// Beta chosen for a held-out task from the ranks on all other tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaChoice {
    pub held_out: String,
    pub metric: String,
    pub beta: f64,
    pub mean_rank: f64,
}

/// Expands every run over `betas`.
pub fn expand_betas(spec: &ExperimentSpec, betas: &[f64]) -> ExperimentSpec {
    let runs = spec
        .runs
        .iter()
        .flat_map(|r| {
            betas.iter().map(move |&b| RunConfig {
                beta: b,
                ..r.clone()
            })
        })
        .collect();
    ExperimentSpec {
        runs,
        ..spec.clone()
    }
}

fn sweep_rows(spec: &ExperimentSpec, report: &ExperimentReport) -> Vec<SweepRow> {
    spec.runs
        .iter()
        .zip(&report.results)
        .filter_map(|(cfg, res)| {
            let done: Vec<&RunResult> = res.iter().flatten().collect();
            if done.is_empty() {
                return None;
            }
            let mean = |f: fn(&RunCurves) -> f64| done.iter().map(|r| f(&RunCurves::of(r))).sum::<f64>() / done.len() as f64;
            Some(SweepRow {
                task: cfg.task_file.as_ref().map_or(cfg.task.clone(), |p| p.display().to_string()),
                algo: cfg.algo,
                beta: cfg.beta,
                avg_reward: mean(|c| c.avg_reward.last().unwrap_or(f64::NAN)),
                best_reward: mean(|c| c.best_reward.last().unwrap_or(f64::NAN)),
                cum_regret: mean(|c| c.cum_regret.last().unwrap_or(f64::NAN)),
            })
        })
        .collect()
}

/// Leave-one-task-out selection: for each held-out task and metric, the
/// beta with the lowest mean rank over the other tasks (all tasks when
/// there is only one). Ties go to the smaller beta.
pub fn select_betas(rows: &[SweepRow]) -> Vec<BetaChoice> {
    let tasks: BTreeSet<(String, String)> = rows.iter().map(|r| (r.task.clone(), format!("{:?}", r.algo))).collect();
    let metrics: [(&str, fn(&SweepRow) -> f64, bool); 3] = [
        ("avg_reward", |r| r.avg_reward, true),
        ("best_reward", |r| r.best_reward, true),
        ("cum_regret", |r| r.cum_regret, false),
    ];
    // rank of each beta on each task; 1 is best
    let mut ranks: BTreeMap<(&str, &(String, String)), Vec<(f64, f64)>> = BTreeMap::new();
    for (name, f, higher) in metrics {
        for key in &tasks {
            let mut cell: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.task == key.0 && format!("{:?}", r.algo) == key.1)
                .collect();
            cell.sort_by(|a, b| {
                let o = f(a).total_cmp(&f(b));
                (if higher { o.reverse() } else { o }).then(a.beta.total_cmp(&b.beta))
            });
            ranks.insert((name, key), cell.iter().enumerate().map(|(k, r)| (r.beta, (k + 1) as f64)).collect());
        }
    }
    let mut out = Vec::new();
    for held in &tasks {
        for (name, _, _) in metrics {
            let others: Vec<&(String, String)> = tasks.iter().filter(|k| *k != held).collect();
            let pool: Vec<&(String, String)> = if others.is_empty() { vec![held] } else { others };
            let mut sums: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
            for k in &pool {
                for (beta, rank) in &ranks[&(name, *k)] {
                    let e = sums.entry(beta.to_bits()).or_insert((0.0, 0));
                    e.0 += rank;
                    e.1 += 1;
                }
            }
            let best = sums
                .iter()
                .map(|(b, (s, n))| (f64::from_bits(*b), s / *n as f64))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.total_cmp(&b.0)));
            if let Some((beta, mean_rank)) = best {
                out.push(BetaChoice {
                    held_out: held.0.clone(),
                    metric: name.to_string(),
                    beta,
                    mean_rank,
                });
            }
        }
    }
    out
}

/// Runs every configured run once per beta and writes `beta_summary.csv` and
/// `beta_selection.csv` next to the usual outputs.
pub fn sweep_beta(spec: &ExperimentSpec, betas: &[f64]) -> Result<(ExperimentReport, Vec<BetaChoice>)> {
    if betas.is_empty() {
        return Err(McboError::Config("beta sweep needs at least one beta".into()));
    }
    let expanded = expand_betas(spec, betas);
    let report = run_experiment(&expanded)?;
    let rows = sweep_rows(&expanded, &report);
    let mut summary = String::from("task,algo,beta,final_avg_reward,final_best_reward,final_cum_regret\n");
    for r in &rows {
        let _ = writeln!(
            summary,
            "{},{:?},{},{},{},{}",
            r.task,
            r.algo,
            r.beta,
            fmt_num(r.avg_reward),
            fmt_num(r.best_reward),
            fmt_num(r.cum_regret)
        );
    }
    write_file(&expanded.output_dir, "beta_summary.csv", &summary)?;
    let choices = select_betas(&rows);
    let mut sel = String::from("held_out_task,metric,beta,mean_rank\n");
    for c in &choices {
        let _ = writeln!(sel, "{},{},{},{}", c.held_out, c.metric, c.beta, c.mean_rank);
    }
    write_file(&expanded.output_dir, "beta_selection.csv", &sel)?;
    Ok((report, choices))
}
