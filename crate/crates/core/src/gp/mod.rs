//! Gaussian process regression engines: exact, SoR, FITC and SKI.

mod inducing;
mod learn;
mod sample;
mod ski;

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

pub use inducing::{
    cholesky_with_retry, fitc_cov, global_gp_weights, sor_cov, sor_matrix, LowRankKind, KUU_JITTER, RETRY_JITTER,
};
pub use learn::{learn_hypers, maximize, LearnResult, OptConfig, OptOutcome, OptResult};
pub use sample::sample_prior;
pub use ski::{ski_dense, SkiOperator, DENSE_SKI_CAP};

use crate::error::{check_len, Error, Result};
use crate::interp::{build_w, InterpScheme, ProductGrid, SparseWeights};
use crate::kernels::Kernel;
use crate::points::Points;
use crate::solver::{cg_solve, cg_solve_from, logdet_scaled, CgConfig, SolveReport};
use crate::structla::{KuuStructure, StructuredKuu};
use inducing::LowRankPosterior;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Points,
    pub y: Vec<f64>,
    pub test_x: Option<Points>,
    pub test_y: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(x: Points, y: Vec<f64>) -> Result<Self> {
        check_len(x.len(), y.len())?;
        if x.is_empty() {
            return Err(Error::InvalidArgument("dataset needs at least one point".into()));
        }
        if x.as_slice().iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("dataset values must be finite".into()));
        }
        Ok(Self { x, y, test_x: None, test_y: None })
    }

    pub fn with_test(mut self, test_x: Points, test_y: Option<Vec<f64>>) -> Result<Self> {
        check_len(self.x.dim(), test_x.dim())?;
        if let Some(ty) = &test_y {
            check_len(test_x.len(), ty.len())?;
        }
        self.test_x = Some(test_x);
        self.test_y = test_y;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn mean_y(&self) -> f64 {
        self.y.iter().sum::<f64>() / self.y.len() as f64
    }
}

/// How the SKI complexity term `log|K_SKI + σ² I|` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogDetMethod {
    /// Scaled eigenvalues of `K_{U,U}`.
    Scaled,
    /// Dense Cholesky of `K_SKI + σ² I`; only for `n ≤ DENSE_SKI_CAP`.
    Dense,
}

#[derive(Clone, Debug)]
pub struct SkiSpec {
    pub grid: ProductGrid,
    pub interp: InterpScheme,
    pub structure: KuuStructure,
    pub logdet: LogDetMethod,
    pub cg: CgConfig,
}

impl SkiSpec {
    pub fn new(grid: ProductGrid, interp: InterpScheme) -> Self {
        Self { grid, interp, structure: KuuStructure::Auto, logdet: LogDetMethod::Scaled, cg: CgConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub enum Scheme {
    Exact,
    Sor { inducing: Points },
    Fitc { inducing: Points },
    Ski(SkiSpec),
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Exact => "exact",
            Scheme::Sor { .. } => "sor",
            Scheme::Fitc { .. } => "fitc",
            Scheme::Ski(_) => "ski",
        }
    }
}

/// A value together with whether every inner CG solve converged.
#[derive(Clone, Debug, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct GpModel {
    data: Dataset,
    kernel: Kernel,
    sigma2: f64,
    scheme: Scheme,
    mean: f64,
    weights: OnceLock<SparseWeights>,
}

impl GpModel {
    pub fn new(data: Dataset, kernel: Kernel, sigma2: f64, scheme: Scheme) -> Result<Self> {
        check_len(kernel.input_dim(), data.x.dim())?;
        if !(sigma2 >= 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidArgument("noise variance must be nonnegative".into()));
        }
        match &scheme {
            Scheme::Sor { inducing } | Scheme::Fitc { inducing } => {
                if inducing.is_empty() {
                    return Err(Error::InvalidArgument("no inducing points".into()));
                }
                check_len(data.x.dim(), inducing.dim())?;
            }
            Scheme::Ski(spec) => {
                check_len(data.x.dim(), spec.grid.dim())?;
                if let Some(x) = data.x.iter().find(|x| !spec.grid.contains(x)) {
                    let b = spec.grid.bounds();
                    let p = (0..x.len()).find(|&p| x[p] < b[p].0 || x[p] > b[p].1).unwrap_or(0);
                    return Err(Error::OutOfRange { value: x[p], lo: b[p].0, hi: b[p].1 });
                }
            }
            Scheme::Exact => {}
        }
        Ok(Self { data, kernel, sigma2, scheme, mean: 0.0, weights: OnceLock::new() })
    }

    /// Uses the training-target average as the constant prior mean.
    pub fn with_empirical_mean(mut self) -> Self {
        self.mean = self.data.mean_y();
        self
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Optimizer coordinates: kernel hyperparameters followed by `ln σ²`.
    pub fn params(&self) -> Vec<f64> {
        let mut p = self.kernel.hypers().raw().to_vec();
        p.push(self.sigma2.ln());
        p
    }

    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        check_len(self.kernel.hypers().len() + 1, params.len())?;
        let (h, s) = params.split_at(params.len() - 1);
        let kernel = self.kernel.with_hypers(crate::kernels::Hypers::from_raw(h.to_vec()))?;
        let sigma2 = s[0].exp();
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidArgument("noise variance left the valid range".into()));
        }
        Ok(Self { kernel, sigma2, ..self.clone() })
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Result<Self> {
        Ok(Self::new(self.data.clone(), self.kernel.clone(), self.sigma2, scheme)?.with_mean(self.mean))
    }

    fn centered_y(&self) -> Vec<f64> {
        self.data.y.iter().map(|y| y - self.mean).collect()
    }

    fn training_weights(&self, spec: &SkiSpec) -> Result<&SparseWeights> {
        if let Some(w) = self.weights.get() {
            return Ok(w);
        }
        let w = build_w(&self.data.x, &spec.grid, spec.interp)?;
        Ok(self.weights.get_or_init(|| w))
    }

    /// SKI operator over the training inputs. Errors for other schemes.
    pub fn ski_operator(&self) -> Result<SkiOperator> {
        let Scheme::Ski(spec) = &self.scheme else {
            return Err(Error::InvalidArgument("model does not use SKI".into()));
        };
        let w = self.training_weights(spec)?.clone();
        let kuu = StructuredKuu::from_kernel(&self.kernel, &spec.grid, spec.structure)?;
        SkiOperator::new(w, kuu, self.sigma2)
    }

    /// Conditions the model on its training data.
    pub fn fit(&self) -> Result<Posterior> {
        let y = self.centered_y();
        let inner = match &self.scheme {
            Scheme::Exact => {
                let (chol, alpha) = self.exact_solve(&y)?;
                PosteriorKind::Exact { chol, alpha }
            }
            Scheme::Sor { inducing } => PosteriorKind::LowRank(LowRankPosterior::new(
                LowRankKind::Sor,
                &self.kernel,
                inducing,
                &self.data.x,
                &y,
                self.sigma2,
            )?),
            Scheme::Fitc { inducing } => PosteriorKind::LowRank(LowRankPosterior::new(
                LowRankKind::Fitc,
                &self.kernel,
                inducing,
                &self.data.x,
                &y,
                self.sigma2,
            )?),
            Scheme::Ski(spec) => {
                let op = self.ski_operator()?;
                let report = cg_solve(|v, o| op.apply_into(v, o), &y, &spec.cg)?;
                PosteriorKind::Ski { op, report, spec: spec.clone() }
            }
        };
        Ok(Posterior { model: self.clone(), inner })
    }

    fn exact_solve(&self, y: &[f64]) -> Result<(Cholesky<f64, Dyn>, DVector<f64>)> {
        let mut k = self.kernel.eval_matrix(&self.data.x, &self.data.x)?;
        for i in 0..k.nrows() {
            k[(i, i)] += self.sigma2;
        }
        let (chol, _) = cholesky_with_retry(&k, 0.0, self.kernel.variance())?;
        let alpha = chol.solve(&DVector::from_column_slice(y));
        Ok((chol, alpha))
    }

    /// `log p(y | θ) = −½ [yᵀ(K + σ²I)⁻¹y + log|K + σ²I| + n log 2π]`.
    pub fn log_marginal_likelihood(&self) -> Result<Flagged<f64>> {
        Ok(self.log_marginal_likelihood_from(None)?.0)
    }

    /// Log marginal likelihood with the SKI solve warm-started from `guess`.
    /// Also returns the SKI solution for reuse as the next guess.
    pub fn log_marginal_likelihood_from(&self, guess: Option<&[f64]>) -> Result<(Flagged<f64>, Option<Vec<f64>>)> {
        let y = self.centered_y();
        let mut solution = None;
        let n = y.len() as f64;
        let (quad, log_det, converged) = match &self.scheme {
            Scheme::Exact => {
                let (chol, alpha) = self.exact_solve(&y)?;
                let quad = DVector::from_column_slice(&y).dot(&alpha);
                let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
                (quad, log_det, true)
            }
            Scheme::Sor { inducing } | Scheme::Fitc { inducing } => {
                let kind = if matches!(self.scheme, Scheme::Sor { .. }) { LowRankKind::Sor } else { LowRankKind::Fitc };
                let p = LowRankPosterior::new(kind, &self.kernel, inducing, &self.data.x, &y, self.sigma2)?;
                (p.quad, p.log_det, true)
            }
            Scheme::Ski(spec) => {
                let op = self.ski_operator()?;
                let report = cg_solve_from(|v, o| op.apply_into(v, o), &y, guess, &spec.cg)?;
                // 2yᵀx − xᵀAx: errors in x enter only at second order.
                let ax = op.apply(&report.solution)?;
                let quad: f64 = y.iter().zip(&report.solution).zip(&ax).map(|((a, b), c)| b * (2.0 * a - c)).sum();
                let log_det = match spec.logdet {
                    LogDetMethod::Scaled => logdet_scaled(&op.kuu().eigenvalues()?, y.len(), self.sigma2)?,
                    LogDetMethod::Dense => {
                        let mut k = op.kernel_dense()?;
                        for i in 0..k.nrows() {
                            k[(i, i)] += self.sigma2;
                        }
                        let (chol, _) = cholesky_with_retry(&k, 0.0, self.kernel.variance())?;
                        2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
                    }
                };
                solution = Some(report.solution);
                (quad, log_det, report.converged)
            }
        };
        Ok((Flagged { value: -0.5 * (quad + log_det + n * (2.0 * PI).ln()), converged }, solution))
    }
}

enum PosteriorKind {
    Exact { chol: Cholesky<f64, Dyn>, alpha: DVector<f64> },
    LowRank(LowRankPosterior),
    Ski { op: SkiOperator, report: SolveReport, spec: SkiSpec },
}

/// A model conditioned on its training data.
pub struct Posterior {
    model: GpModel,
    inner: PosteriorKind,
}

impl Posterior {
    pub fn model(&self) -> &GpModel {
        &self.model
    }

    /// CG report of the training solve, for SKI.
    pub fn solve_report(&self) -> Option<&SolveReport> {
        match &self.inner {
            PosteriorKind::Ski { report, .. } => Some(report),
            _ => None,
        }
    }

    pub fn predict_mean(&self, xs: &Points) -> Result<Flagged<Vec<f64>>> {
        let kernel = &self.model.kernel;
        check_len(kernel.input_dim(), xs.dim())?;
        let mu = self.model.mean;
        let (values, converged) = match &self.inner {
            PosteriorKind::Exact { alpha, .. } => {
                let ks = kernel.eval_matrix(xs, &self.model.data.x)?;
                ((ks * alpha).as_slice().to_vec(), true)
            }
            PosteriorKind::LowRank(p) => (p.predict_mean(kernel, xs)?, true),
            PosteriorKind::Ski { op, report, spec } => {
                let ws = build_w(xs, &spec.grid, spec.interp)?;
                let u = op.weights().spmv_t(&report.solution)?;
                let ku = op.kuu().matvec(&u)?;
                (ws.spmv(&ku)?, report.converged)
            }
        };
        Ok(Flagged { value: values.into_iter().map(|v| v + mu).collect(), converged })
    }

    /// Diagonal of the latent predictive covariance, clamped at zero.
    pub fn predict_variance(&self, xs: &Points) -> Result<Flagged<Vec<f64>>> {
        let kernel = &self.model.kernel;
        check_len(kernel.input_dim(), xs.dim())?;
        match &self.inner {
            PosteriorKind::Exact { chol, .. } => {
                let kxs = kernel.eval_matrix(&self.model.data.x, xs)?;
                let v = chol.l_dirty().solve_lower_triangular(&kxs).expect("nonsingular factor");
                let k0 = kernel.variance();
                let var = (0..xs.len()).map(|i| (k0 - v.column(i).norm_squared()).max(0.0)).collect();
                Ok(Flagged { value: var, converged: true })
            }
            PosteriorKind::LowRank(p) => Ok(Flagged { value: p.predict_variance(kernel, xs)?, converged: true }),
            PosteriorKind::Ski { op, spec, .. } => {
                let ws = build_w(xs, &spec.grid, spec.interp)?;
                let m = op.kuu().size();
                let one = |i: usize| -> Result<(f64, bool)> {
                    let (idx, w) = ws.row(i);
                    let mut e = vec![0.0; m];
                    for (&c, &wc) in idx.iter().zip(w) {
                        e[c] += wc;
                    }
                    let ke = op.kuu().matvec(&e)?;
                    let prior: f64 = e.iter().zip(&ke).map(|(a, b)| a * b).sum();
                    let cross = op.weights().spmv(&ke)?;
                    let r = cg_solve(|v, o| op.apply_into(v, o), &cross, &spec.cg)?;
                    let explained: f64 = cross.iter().zip(&r.solution).map(|(a, b)| a * b).sum();
                    Ok(((prior - explained).max(0.0), r.converged))
                };
                #[cfg(feature = "parallel")]
                let results: Vec<Result<(f64, bool)>> = {
                    use rayon::prelude::*;
                    (0..xs.len()).into_par_iter().map(one).collect()
                };
                #[cfg(not(feature = "parallel"))]
                let results: Vec<Result<(f64, bool)>> = (0..xs.len()).map(one).collect();
                let mut value = Vec::with_capacity(xs.len());
                let mut converged = true;
                for r in results {
                    let (v, c) = r?;
                    value.push(v);
                    converged &= c;
                }
                Ok(Flagged { value, converged })
            }
        }
    }
}

/// Dense exact `K_{X,X}` plus noise, for oracles.
pub fn dense_covariance(kernel: &Kernel, x: &Points, sigma2: f64) -> Result<DMatrix<f64>> {
    let mut k = kernel.eval_matrix(x, x)?;
    for i in 0..k.nrows() {
        k[(i, i)] += sigma2;
    }
    Ok(k)
}
