//! Signal infill: predict contiguous gaps of a 1D signal with SKI on a
//! Toeplitz grid and with FITC, across a sweep of inducing-point counts.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gp::{learn_hypers, Dataset, GpModel, OptConfig, OptOutcome, Scheme, SkiSpec};
use crate::interp::{padded_grid, regular_grid, InterpScheme};
use crate::kernels::Kernel;
use crate::points::Points;

use super::config::{ExperimentConfig, Method, SchemeChoice};
use super::data::ingest_csv;
use super::manifest::ModelEntry;
use super::metrics::{MetricsRow, Table};
use super::RunOutput;

/// Sum of amplitude-modulated sinusoids sampled at `t = 0, 1, …, n − 1`,
/// plus white noise of variance `noise`.
pub fn synthetic_signal(n: usize, noise: f64, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let periods = [23.0, 37.0, 61.0];
    let amplitudes = [1.0, 0.7, 0.5];
    let envelopes = [900.0, 1400.0, 2300.0];
    let phases: Vec<(f64, f64)> =
        (0..3).map(|_| (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..2.0 * PI))).collect();
    let eps = Normal::new(0.0, noise.sqrt()).expect("nonnegative noise");
    let t: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let y = t
        .iter()
        .map(|&s| {
            let clean: f64 = (0..3)
                .map(|j| {
                    let (phi, psi) = phases[j];
                    amplitudes[j]
                        * (1.0 + 0.6 * (2.0 * PI * s / envelopes[j] + psi).sin())
                        * (2.0 * PI * s / periods[j] + phi).sin()
                })
                .sum();
            clean + if noise > 0.0 { eps.sample(&mut rng) } else { 0.0 }
        })
        .collect();
    (t, y)
}

/// Ten gaps of twelve samples each, evenly spread over `[0, n)`.
pub fn default_gaps(n: usize) -> Vec<(f64, f64)> {
    (0..10)
        .map(|k| {
            let c = ((k as f64 + 0.5) * n as f64 / 10.0).floor();
            (c - 6.0, c + 6.0)
        })
        .collect()
}

/// `MAE(pred) / MAE(reference)`, with the reference predicting `mean`.
pub fn smae(pred: &[f64], truth: &[f64], mean: f64) -> f64 {
    let mae: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / truth.len() as f64;
    let base: f64 = truth.iter().map(|t| (mean - t).abs()).sum::<f64>() / truth.len() as f64;
    mae / base
}

#[derive(Clone, Debug)]
pub struct InfillRun {
    pub method: Method,
    pub m: usize,
    pub fit_time_s: f64,
    pub predict_time_s: f64,
    pub mae: Option<f64>,
    pub smae: Option<f64>,
    pub converged: bool,
    pub cg_iterations: Option<usize>,
    pub predictions: Vec<f64>,
}

impl InfillRun {
    pub fn total_time_s(&self) -> f64 {
        self.fit_time_s + self.predict_time_s
    }
}

/// Best SMAE of each method among runs finishing within `budget_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetComparison {
    pub budget_s: f64,
    pub ski_best: f64,
    pub fitc_best: f64,
}

#[derive(Clone, Debug)]
pub struct InfillReport {
    pub kernel: Kernel,
    pub noise_variance: f64,
    pub learn_outcome: Option<OptOutcome>,
    pub runs: Vec<InfillRun>,
    /// SMAE of predicting the training mean everywhere.
    pub baseline_smae: Option<f64>,
    pub n_train: usize,
    pub n_eval: usize,
    pub output: RunOutput,
}

impl InfillReport {
    /// Every run time at which both SKI and FITC have at least one finished
    /// run, with each method's best SMAE at that budget.
    pub fn matched_budgets(&self) -> Vec<BudgetComparison> {
        let best = |method: Method, budget: f64| {
            self.runs
                .iter()
                .filter(|r| r.method == method && r.total_time_s() <= budget)
                .filter_map(|r| r.smae)
                .fold(None, |acc: Option<f64>, s| Some(acc.map_or(s, |a| a.min(s))))
        };
        let mut budgets: Vec<f64> = self.runs.iter().map(InfillRun::total_time_s).collect();
        budgets.sort_by(f64::total_cmp);
        budgets.dedup();
        budgets
            .into_iter()
            .filter_map(|b| match (best(Method::Ski, b), best(Method::Fitc, b)) {
                (Some(s), Some(f)) => Some(BudgetComparison { budget_s: b, ski_best: s, fitc_best: f }),
                _ => None,
            })
            .collect()
    }
}

struct Split {
    data: Dataset,
    eval_x: Points,
    eval_y: Option<Vec<f64>>,
    on_train: bool,
}

fn load(cfg: &ExperimentConfig) -> Result<Split> {
    let (t, y, unknown) = match &cfg.data {
        Some(path) => {
            let d = ingest_csv(path)?;
            if d.x.dim() != 1 {
                return Err(Error::Config("infill expects a two-column (t, y) file".into()));
            }
            (d.x.as_slice().to_vec(), d.y, d.test_x.map(|p| p.as_slice().to_vec()).unwrap_or_default())
        }
        None => {
            let (t, y) = synthetic_signal(cfg.n.unwrap_or(8000), cfg.signal_noise.unwrap_or(0.01), cfg.seed);
            (t, y, Vec::new())
        }
    };
    let gaps = match (&cfg.gaps, &cfg.data) {
        (Some(g), _) => g.clone(),
        (None, None) => default_gaps(t.len()),
        (None, Some(_)) => Vec::new(),
    };
    let (lo, hi) = t.iter().chain(&unknown).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if let Some(&(a, b)) = gaps.iter().find(|(a, b)| *a < lo || *b > hi) {
        return Err(Error::Config(format!("gap {a}:{b} lies outside the signal span [{lo}, {hi}]")));
    }
    let in_gap = |s: f64| gaps.iter().any(|&(a, b)| s >= a && s < b);
    let (mut tr_t, mut tr_y, mut te_t, mut te_y) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (&s, &v) in t.iter().zip(&y) {
        if in_gap(s) {
            te_t.push(s);
            te_y.push(v);
        } else {
            tr_t.push(s);
            tr_y.push(v);
        }
    }
    if tr_t.is_empty() {
        return Err(Error::Config("gaps cover the whole signal".into()));
    }
    let data = Dataset::new(Points::from_1d(tr_t.clone()), tr_y.clone())?;
    Ok(if !te_t.is_empty() {
        Split { data, eval_x: Points::from_1d(te_t), eval_y: Some(te_y), on_train: false }
    } else if !unknown.is_empty() {
        Split { data, eval_x: Points::from_1d(unknown), eval_y: None, on_train: false }
    } else {
        Split { data, eval_x: Points::from_1d(tr_t), eval_y: Some(tr_y), on_train: true }
    })
}

pub fn run_infill(cfg: &ExperimentConfig) -> Result<InfillReport> {
    let split = load(cfg)?;
    let data = split.data;
    let n = data.n();
    let interp = match cfg.schemes.as_deref() {
        None | Some([SchemeChoice::Cubic]) => InterpScheme::Cubic,
        Some([SchemeChoice::Linear]) => InterpScheme::Linear,
        Some(_) => return Err(Error::Config("infill takes a single linear or cubic SKI scheme".into())),
    };
    let methods = cfg.methods.clone().unwrap_or_else(|| vec![Method::Ski, Method::Fitc]);
    let ski_ms = cfg.m_sweep.clone().unwrap_or_else(|| vec![2000, 4000, 8000, 16000]);
    let fitc_ms = cfg.fitc_m_sweep.clone().unwrap_or_else(|| vec![50, 100, 200, 400, 800]);

    let mean = data.mean_y();
    let var_y = data.y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    let init = Kernel::rbf(1, cfg.lengthscale.unwrap_or(10.0), cfg.signal_variance.unwrap_or(var_y.max(1e-12)))?;
    let init_noise = cfg.noise_variance.unwrap_or(0.1 * var_y.max(1e-12));

    // Hyperparameters from an exact GP on a contiguous training prefix.
    let (kernel, noise_variance, learn_outcome) = if cfg.learn.unwrap_or(true) {
        let k = cfg.learn_subset.unwrap_or(500).min(n);
        let idx: Vec<usize> = (0..k).collect();
        let sub = Dataset::new(data.x.select(&idx), idx.iter().map(|&i| data.y[i]).collect())?;
        let model = GpModel::new(sub, init, init_noise, Scheme::Exact)?.with_empirical_mean();
        let opt = OptConfig {
            max_iters: cfg.opt_iters.unwrap_or(OptConfig::default().max_iters),
            max_evals: cfg.opt_evals.unwrap_or(OptConfig::default().max_evals),
            ..OptConfig::default()
        };
        let res = learn_hypers(&model, &opt)?;
        (res.model.kernel().clone(), res.model.sigma2(), Some(res.outcome))
    } else {
        (init, init_noise, None)
    };

    let all_t: Vec<f64> = data.x.as_slice().iter().chain(split.eval_x.as_slice()).copied().collect();
    let bounds = Points::from_1d(all_t).bounds();

    let mut plans: Vec<(Method, usize, Scheme)> = Vec::new();
    for &method in &methods {
        match method {
            Method::Ski => {
                for &m in &ski_ms {
                    plans.push((method, m, Scheme::Ski(SkiSpec::new(padded_grid(&bounds, &[m], 2)?, interp))));
                }
            }
            Method::Fitc | Method::Sor => {
                for &m in &fitc_ms {
                    let u = regular_grid(&bounds, &[m])?.points();
                    let scheme =
                        if method == Method::Fitc { Scheme::Fitc { inducing: u } } else { Scheme::Sor { inducing: u } };
                    plans.push((method, m, scheme));
                }
            }
            Method::Exact => plans.push((method, n, Scheme::Exact)),
        }
    }

    let execute = |scheme: &Scheme| -> Result<(f64, f64, Vec<f64>, bool, Option<usize>)> {
        let start = Instant::now();
        let model = GpModel::new(data.clone(), kernel.clone(), noise_variance, scheme.clone())?.with_mean(mean);
        let post = model.fit()?;
        let fit_time = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let pred = post.predict_mean(&split.eval_x)?;
        let predict_time = start.elapsed().as_secs_f64();
        let iters = post.solve_report().map(|r| r.iterations);
        Ok((fit_time, predict_time, pred.value, pred.converged, iters))
    };

    let mut warmed: Vec<Method> = Vec::new();
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for (method, m, scheme) in &plans {
        if !warmed.contains(method) {
            execute(scheme)?;
            warmed.push(*method);
        }
        let (fit_time_s, predict_time_s, predictions, converged, cg_iterations) = execute(scheme)?;
        let (mae, s) = match &split.eval_y {
            Some(truth) => {
                let mae = predictions.iter().zip(truth).map(|(p, t)| (p - t).abs()).sum::<f64>() / truth.len() as f64;
                (Some(mae), Some(smae(&predictions, truth, mean)))
            }
            None => (None, None),
        };
        let mut row = MetricsRow::new(method.name(), Some(*m), fit_time_s);
        row.solve_time_s = Some(predict_time_s);
        row.mae = mae;
        row.smae = s;
        row.notes = format!(
            "eval={};converged={converged}{}",
            if split.on_train { "train" } else { "test" },
            cg_iterations.map(|i| format!(";cg_iterations={i}")).unwrap_or_default()
        );
        rows.push(row);
        runs.push(InfillRun {
            method: *method,
            m: *m,
            fit_time_s,
            predict_time_s,
            mae,
            smae: s,
            converged,
            cg_iterations,
            predictions,
        });
    }

    let baseline_smae = split.eval_y.as_ref().map(|truth| smae(&vec![mean; truth.len()], truth, mean));
    let mut row = MetricsRow::new("empirical-mean", None, 0.0);
    row.solve_time_s = Some(0.0);
    row.smae = baseline_smae;
    row.mae =
        split.eval_y.as_ref().map(|truth| truth.iter().map(|t| (mean - t).abs()).sum::<f64>() / truth.len() as f64);
    rows.push(row);

    let mut header = vec!["t".to_string(), "y".to_string()];
    header.extend(runs.iter().map(|r| format!("{}_{}", r.method.name(), r.m)));
    let table_rows = (0..split.eval_x.len())
        .map(|i| {
            let mut r = vec![split.eval_x.row(i)[0], split.eval_y.as_ref().map_or(f64::NAN, |y| y[i])];
            r.extend(runs.iter().map(|run| run.predictions[i]));
            r
        })
        .collect();
    let tables = vec![Table { name: "predictions".into(), header, rows: table_rows }];
    let models = vec![ModelEntry {
        label: "shared".into(),
        scheme: format!("hypers from exact subset; ski interp={}", interp.name()),
        kernel: kernel.clone(),
        noise_variance,
    }];
    Ok(InfillReport {
        kernel,
        noise_variance,
        learn_outcome,
        runs,
        baseline_smae,
        n_train: n,
        n_eval: split.eval_x.len(),
        output: RunOutput { rows, models, tables },
    })
}
