//! Kernel learning: sample from a known product kernel, refit a spectral
//! mixture with SKI and FITC, compare the learned kernels with the truth.

use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gp::{learn_hypers, sample_prior, Dataset, GpModel, OptConfig, OptOutcome, Scheme, SkiSpec};
use crate::interp::{padded_grid, InterpScheme};
use crate::kernels::Kernel;
use crate::points::Points;
use crate::structla::KuuStructure;

use super::config::{ExperimentConfig, Method, SchemeChoice, SmComponent};
use super::manifest::ModelEntry;
use super::metrics::{MetricsRow, Table};
use super::RunOutput;

/// Grid points per axis used to draw the training sample.
const SAMPLING_GRID: usize = 200;

/// Optimizer iterations and evaluations shared by every method.
pub const DEFAULT_OPT_ITERS: usize = 150;
pub const DEFAULT_OPT_EVALS: usize = 12_000;

pub fn default_true_components() -> [Vec<SmComponent>; 2] {
    [vec![(1.0, 0.5, 0.003), (0.4, 0.0, 0.02)], vec![(1.0, 0.9, 0.004), (0.5, 0.25, 0.002)]]
}

fn sm_kernel(components: &[SmComponent]) -> Result<Kernel> {
    let w: Vec<f64> = components.iter().map(|c| c.0).collect();
    let mu: Vec<f64> = components.iter().map(|c| c.1).collect();
    let v: Vec<f64> = components.iter().map(|c| c.2).collect();
    Kernel::spectral_mixture(&w, &mu, &v)
}

/// Spectral-mixture starting point for one axis: equal weights, means on a
/// log-spaced ladder from `1/span` up to `nyquist`, spectral standard
/// deviations of `1/span`.
pub fn initial_sm(components: usize, amplitude: f64, span: f64, nyquist: f64) -> Result<Kernel> {
    let lo = 1.0 / span;
    let hi = nyquist.max(2.0 * lo);
    let means: Vec<f64> = (0..components)
        .map(|q| if components == 1 { lo } else { lo * (hi / lo).powf(q as f64 / (components - 1) as f64) })
        .collect();
    let weights = vec![amplitude / components as f64; components];
    let variances = vec![lo * lo; components];
    Kernel::spectral_mixture(&weights, &means, &variances)
}

/// Pearson correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

/// `k_p(τ) / k_p(0)` for every axis factor of `kernel`.
pub fn normalized_curves(kernel: &Kernel, tau: &[f64]) -> Result<Vec<Vec<f64>>> {
    let factors = kernel.axis_factors().ok_or_else(|| Error::Structure("kernel does not factor over axes".into()))?;
    Ok(factors
        .iter()
        .map(|k| {
            let k0 = k.eval_lag(&[0.0]);
            tau.iter().map(|&t| k.eval_lag(&[t]) / k0).collect()
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct LearnedFit {
    pub method: Method,
    pub m: usize,
    pub kernel: Kernel,
    pub noise_variance: f64,
    pub curves: Vec<Vec<f64>>,
    pub correlations: Vec<f64>,
    pub setup_time_s: f64,
    pub learn_time_s: f64,
    pub outcome: OptOutcome,
    pub evals: usize,
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct KernelLearnReport {
    pub tau: Vec<f64>,
    pub truth: Vec<Vec<f64>>,
    pub fits: Vec<LearnedFit>,
    pub output: RunOutput,
}

impl KernelLearnReport {
    pub fn fit(&self, method: Method) -> Option<&LearnedFit> {
        self.fits.iter().find(|f| f.method == method)
    }
}

/// Training data for the kernel-learning experiment together with the
/// generating kernel.
pub fn generate_data(cfg: &ExperimentConfig) -> Result<(Dataset, Kernel)> {
    let n = cfg.n.unwrap_or(2000);
    let std = cfg.input_std.unwrap_or(2.0);
    let noise = cfg.noise_variance.unwrap_or(0.01);
    let defaults = default_true_components();
    let truth = Kernel::product(vec![
        sm_kernel(cfg.true_dim0.as_deref().unwrap_or(&defaults[0]))?,
        sm_kernel(cfg.true_dim1.as_deref().unwrap_or(&defaults[1]))?,
    ])?;
    // Inputs ~ N(0, std² I); targets from the prior sampler on a fine grid
    // plus white noise.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, std).expect("positive std");
    let x = Points::new((0..2 * n).map(|_| normal.sample(&mut rng)).collect(), 2)?;
    let fine = padded_grid(&x.bounds(), &[SAMPLING_GRID, SAMPLING_GRID], 2)?;
    let f = sample_prior(&x, &fine, InterpScheme::Cubic, &truth, cfg.seed.wrapping_add(1), 1)?.remove(0);
    let eps = Normal::new(0.0, noise.sqrt()).expect("nonnegative noise");
    let y: Vec<f64> = f.iter().map(|v| v + eps.sample(&mut rng)).collect();
    Ok((Dataset::new(x, y)?, truth))
}

pub fn run_kernel_learning(cfg: &ExperimentConfig) -> Result<KernelLearnReport> {
    let noise = cfg.noise_variance.unwrap_or(0.01);
    let q = cfg.components.unwrap_or(5);
    let (data, truth_kernel) = generate_data(cfg)?;
    let n = data.n();
    let x = data.x.clone();
    let interp = match cfg.schemes.as_deref() {
        None => InterpScheme::Cubic,
        Some([SchemeChoice::Cubic]) => InterpScheme::Cubic,
        Some([SchemeChoice::Linear]) => InterpScheme::Linear,
        Some(_) => return Err(Error::Config("kernel-learn takes a single linear or cubic scheme".into())),
    };
    let ski_axes = cfg.m_sweep.clone().unwrap_or_else(|| vec![80]);
    let fitc_ms = cfg.fitc_m_sweep.clone().unwrap_or_else(|| vec![100]);
    let methods = cfg.methods.clone().unwrap_or_else(|| vec![Method::Ski, Method::Fitc]);

    let bounds = x.bounds();
    let var_y = {
        let mu = data.mean_y();
        data.y.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64
    };

    let tau_max = cfg.tau_max.unwrap_or(4.0);
    let tau: Vec<f64> = (0..=200).map(|i| tau_max * i as f64 / 200.0).collect();
    let truth = normalized_curves(&truth_kernel, &tau)?;

    // Shared initialization, built from the finest SKI grid.
    let finest = *ski_axes.iter().max().expect("nonempty sweep");
    let init_grid = padded_grid(&bounds, &[finest, finest], 2)?;
    let init = Kernel::product(
        (0..2)
            .map(|p| {
                let axis = init_grid.axis(p);
                let h = axis[1] - axis[0];
                let span = bounds[p].1 - bounds[p].0;
                initial_sm(q, var_y.sqrt(), span, 0.5 / h)
            })
            .collect::<Result<_>>()?,
    )?;
    let init_noise = 0.1 * var_y;
    let opt = OptConfig {
        max_iters: cfg.opt_iters.unwrap_or(DEFAULT_OPT_ITERS),
        max_evals: cfg.opt_evals.unwrap_or(DEFAULT_OPT_EVALS),
        ..OptConfig::default()
    };

    let mut fits = Vec::new();
    let mut runs: Vec<(Method, usize, Scheme, String)> = Vec::new();
    for &method in &methods {
        match method {
            Method::Ski => {
                for &a in &ski_axes {
                    let grid = padded_grid(&bounds, &[a, a], 2)?;
                    let mut spec = SkiSpec::new(grid, interp);
                    spec.structure = KuuStructure::Auto;
                    runs.push((method, a * a, Scheme::Ski(spec), format!("ski grid={a}x{a} interp={}", interp.name())));
                }
            }
            Method::Fitc | Method::Sor => {
                for &m in &fitc_ms {
                    if m > n {
                        return Err(Error::Config(format!("{m} inducing points exceed n = {n}")));
                    }
                    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));
                    let idx = sample_indices(&mut r, n, m).into_vec();
                    let u = x.select(&idx);
                    let scheme =
                        if method == Method::Fitc { Scheme::Fitc { inducing: u } } else { Scheme::Sor { inducing: u } };
                    runs.push((method, m, scheme, format!("{} m={m} subset", method.name())));
                }
            }
            Method::Exact => runs.push((method, n, Scheme::Exact, "exact".into())),
        }
    }

    let mut rows = Vec::new();
    let mut models = vec![ModelEntry {
        label: "true".into(),
        scheme: "generator".into(),
        kernel: truth_kernel.clone(),
        noise_variance: noise,
    }];
    let mut tables = Vec::new();
    for (method, m, scheme, desc) in runs {
        let start = Instant::now();
        let model = GpModel::new(data.clone(), init.clone(), init_noise, scheme)?.with_empirical_mean();
        let setup_time_s = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let res = learn_hypers(&model, &opt)?;
        let learn_time_s = start.elapsed().as_secs_f64();
        let kernel = res.model.kernel().clone();
        let curves = normalized_curves(&kernel, &tau)?;
        let correlations: Vec<f64> = curves.iter().zip(&truth).map(|(c, t)| correlation(c, t)).collect();
        let mae = curves
            .iter()
            .zip(&truth)
            .map(|(c, t)| c.iter().zip(t).map(|(a, b)| (a - b).abs()).sum::<f64>() / c.len() as f64)
            .sum::<f64>()
            / curves.len() as f64;
        let mut row = MetricsRow::new(method.name(), Some(m), setup_time_s);
        row.solve_time_s = Some(learn_time_s);
        row.mae = Some(mae);
        row.notes = format!(
            "corr_dim0={:.6};corr_dim1={:.6};loglik={:.6};evals={};outcome={:?}",
            correlations[0], correlations[1], res.log_likelihood, res.evals, res.outcome
        );
        rows.push(row);
        let label = format!("{}_{m}", method.name());
        models.push(ModelEntry {
            label: label.clone(),
            scheme: desc,
            kernel: kernel.clone(),
            noise_variance: res.model.sigma2(),
        });
        if cfg.trace {
            tables.push(Table {
                name: format!("trace_{label}"),
                header: vec!["iteration".into(), "best_log_likelihood".into()],
                rows: res.trace.iter().enumerate().map(|(i, v)| vec![i as f64, *v]).collect(),
            });
        }
        fits.push(LearnedFit {
            method,
            m,
            kernel,
            noise_variance: res.model.sigma2(),
            curves,
            correlations,
            setup_time_s,
            learn_time_s,
            outcome: res.outcome,
            evals: res.evals,
            trace: res.trace,
        });
    }

    let mut header = vec!["tau".to_string()];
    for p in 0..2 {
        header.push(format!("true_dim{p}"));
        for f in &fits {
            header.push(format!("{}_{}_dim{p}", f.method.name(), f.m));
        }
    }
    let curve_rows = (0..tau.len())
        .map(|i| {
            let mut r = vec![tau[i]];
            for p in 0..2 {
                r.push(truth[p][i]);
                r.extend(fits.iter().map(|f| f.curves[p][i]));
            }
            r
        })
        .collect();
    tables.insert(0, Table { name: "kernel_curves".into(), header, rows: curve_rows });
    Ok(KernelLearnReport { tau, truth, fits, output: RunOutput { rows, models, tables } })
}
