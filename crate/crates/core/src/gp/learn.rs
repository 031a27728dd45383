//! Marginal-likelihood maximization by nonlinear conjugate gradients.

use crate::error::Result;
use crate::solver::CgConfig;

use super::{GpModel, Scheme};

#[derive(Clone, Copy, Debug)]
pub struct OptConfig {
    pub max_iters: usize,
    /// Total objective evaluations, gradients included.
    pub max_evals: usize,
    /// Central-difference step in log-space.
    pub fd_step: f64,
    /// Stop once the gradient norm falls below this.
    pub grad_tol: f64,
    /// Length of the first trial step along a fresh direction.
    pub initial_step: f64,
    /// Relative CG tolerance inside SKI objective evaluations.
    pub cg_tol: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self { max_iters: 60, max_evals: 4000, fd_step: 1e-4, grad_tol: 1e-5, initial_step: 0.5, cg_tol: 1e-4 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptOutcome {
    GradientSmall,
    NoProgress,
    MaxIters,
    /// Evaluation budget ran out; the best point so far is returned.
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct OptResult {
    pub x: Vec<f64>,
    pub value: f64,
    /// Best objective after each iteration, starting with the initial point.
    pub trace: Vec<f64>,
    pub evals: usize,
    pub outcome: OptOutcome,
}

struct Counted<F> {
    f: F,
    evals: usize,
    budget: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn call(&mut self, x: &[f64]) -> Option<f64> {
        if self.evals >= self.budget {
            return None;
        }
        self.evals += 1;
        let v = (self.f)(x);
        Some(if v.is_nan() { f64::NEG_INFINITY } else { v })
    }

    fn gradient(&mut self, x: &[f64], h: f64) -> Option<Vec<f64>> {
        let mut g = vec![0.0; x.len()];
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            xp[i] = x[i] + h;
            let fp = self.call(&xp)?;
            xp[i] = x[i] - h;
            let fm = self.call(&xp)?;
            xp[i] = x[i];
            g[i] = if fp.is_finite() && fm.is_finite() { (fp - fm) / (2.0 * h) } else { 0.0 };
        }
        Some(g)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximizes `f` with Polak–Ribière (PR+) conjugate gradients and
/// finite-difference gradients. Non-finite objective values count as `−∞`.
pub fn maximize<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], cfg: &OptConfig) -> OptResult {
    let mut obj = Counted { f, evals: 0, budget: cfg.max_evals.max(1) };
    let mut x = x0.to_vec();
    let mut fx = obj.call(&x).unwrap_or(f64::NEG_INFINITY);
    let mut trace = vec![fx];
    let finish = |x: Vec<f64>, fx: f64, trace: Vec<f64>, evals: usize, outcome| OptResult {
        x,
        value: fx,
        trace,
        evals,
        outcome,
    };

    let Some(mut g) = obj.gradient(&x, cfg.fd_step) else {
        return finish(x, fx, trace, obj.evals, OptOutcome::BudgetExhausted);
    };
    let mut d = g.clone();
    let mut step = cfg.initial_step;

    for _ in 0..cfg.max_iters {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < cfg.grad_tol {
            return finish(x, fx, trace, obj.evals, OptOutcome::GradientSmall);
        }
        if dot(&g, &d) <= 0.0 {
            d = g.clone();
        }
        let mut accepted = None;
        for attempt in 0..2 {
            let dnorm = dot(&d, &d).sqrt();
            let slope = dot(&g, &d) / dnorm;
            let mut t = step;
            for _ in 0..30 {
                let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di / dnorm).collect();
                let Some(ft) = obj.call(&trial) else {
                    return finish(x, fx, trace, obj.evals, OptOutcome::BudgetExhausted);
                };
                if ft.is_finite() && ft >= fx + 1e-4 * t * slope {
                    accepted = Some((trial, ft, t));
                    break;
                }
                t *= 0.5;
            }
            if accepted.is_some() || attempt == 1 {
                break;
            }
            // Retry along steepest ascent.
            d = g.clone();
            step = cfg.initial_step;
        }
        let Some((xn, fnew, t)) = accepted else {
            return finish(x, fx, trace, obj.evals, OptOutcome::NoProgress);
        };
        step = (2.0 * t).min(4.0 * cfg.initial_step);
        x = xn;
        fx = fnew;
        trace.push(fx);
        let Some(gn) = obj.gradient(&x, cfg.fd_step) else {
            return finish(x, fx, trace, obj.evals, OptOutcome::BudgetExhausted);
        };
        let diff: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let beta = (dot(&gn, &diff) / dot(&g, &g)).max(0.0);
        d = gn.iter().zip(&d).map(|(gi, di)| gi + beta * di).collect();
        g = gn;
    }
    finish(x, fx, trace, obj.evals, OptOutcome::MaxIters)
}

#[derive(Clone, Debug)]
pub struct LearnResult {
    pub model: GpModel,
    pub log_likelihood: f64,
    pub trace: Vec<f64>,
    pub evals: usize,
    pub outcome: OptOutcome,
}

/// Fits kernel hyperparameters and noise variance by maximizing the log
/// marginal likelihood, starting from the model's current values.
pub fn learn_hypers(model: &GpModel, cfg: &OptConfig) -> Result<LearnResult> {
    let mut work = model.clone();
    if let Scheme::Ski(spec) = &mut work.scheme {
        spec.cg = CgConfig { tol: cfg.cg_tol, ..spec.cg };
    }
    // Build the interpolation weights once; hyperparameters never change them.
    if let Scheme::Ski(spec) = &work.scheme {
        work.training_weights(&spec.clone())?;
    }
    // Consecutive evaluations sit close together, so each SKI solve starts
    // from the previous solution.
    let mut guess: Option<Vec<f64>> = None;
    let objective = |p: &[f64]| -> f64 {
        match work.with_params(p).and_then(|m| m.log_marginal_likelihood_from(guess.as_deref())) {
            Ok((v, sol)) => {
                if sol.as_ref().is_some_and(|s| s.iter().all(|v| v.is_finite())) {
                    guess = sol;
                }
                v.value
            }
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let res = maximize(objective, &model.params(), cfg);
    let fitted = model.with_params(&res.x)?;
    Ok(LearnResult {
        model: fitted,
        log_likelihood: res.value,
        trace: res.trace,
        evals: res.evals,
        outcome: res.outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maximizes_concave_quadratic() {
        let f = |x: &[f64]| -((x[0] - 1.0).powi(2) + 10.0 * (x[1] + 2.0).powi(2));
        let r = maximize(f, &[0.0, 0.0], &OptConfig { grad_tol: 1e-8, ..OptConfig::default() });
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] + 2.0).abs() < 1e-4, "{:?}", r.x);
        assert!(r.trace.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rosenbrock_makes_progress() {
        let f = |x: &[f64]| -(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
        let r = maximize(f, &[-1.2, 1.0], &OptConfig { max_iters: 500, max_evals: 20000, ..OptConfig::default() });
        assert!(r.value > -1e-2, "{}", r.value);
    }

    #[test]
    fn nan_regions_are_avoided() {
        let f = |x: &[f64]| if x[0] > 0.5 { f64::NAN } else { -(x[0] - 1.0).powi(2) };
        let r = maximize(f, &[0.0], &OptConfig::default());
        assert!(r.x[0] <= 0.5 && r.value.is_finite());
    }

    #[test]
    fn budget_is_respected() {
        let mut calls = 0;
        let f = |x: &[f64]| {
            calls += 1;
            -x[0] * x[0]
        };
        let r = maximize(f, &[3.0], &OptConfig { max_evals: 5, ..OptConfig::default() });
        assert_eq!(r.outcome, OptOutcome::BudgetExhausted);
        assert!(r.evals <= 5);
        assert!(calls <= 5);
    }
}
