//! Conjugate gradients and log-determinants.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct CgConfig {
    /// Target `‖A x − b‖ / ‖b‖`.
    pub tol: f64,
    pub max_iters: usize,
    /// Keep the per-iteration relative residual in the report.
    pub record_trace: bool,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iters: 1000, record_trace: false }
    }
}

impl CgConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
    pub trace: Vec<f64>,
}

const RESIDUAL_REFRESH: usize = 50;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for a symmetric positive definite operator given as
/// `apply(v, out)` writing `A v` into `out`. Starts from `x = 0`.
pub fn cg_solve<F>(apply: F, b: &[f64], cfg: &CgConfig) -> Result<SolveReport>
where
    F: Fn(&[f64], &mut [f64]),
{
    cg_solve_from(apply, b, None, cfg)
}

/// CG started from `guess` instead of zero. Returns the guess untouched when
/// its residual already meets the tolerance.
pub fn cg_solve_from<F>(apply: F, b: &[f64], guess: Option<&[f64]>, cfg: &CgConfig) -> Result<SolveReport>
where
    F: Fn(&[f64], &mut [f64]),
{
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument("CG tolerance must be positive".into()));
    }
    if cfg.max_iters == 0 {
        return Err(Error::InvalidArgument("CG needs at least one iteration".into()));
    }
    let n = b.len();
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok(SolveReport {
            solution: vec![0.0; n],
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
            trace: Vec::new(),
        });
    }
    let mut ap = vec![0.0; n];
    let (mut x, mut r) = match guess {
        Some(g) => {
            if g.len() != n {
                return Err(Error::Dimension { expected: n, got: g.len() });
            }
            apply(g, &mut ap);
            (g.to_vec(), b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect::<Vec<f64>>())
        }
        None => (vec![0.0; n], b.to_vec()),
    };
    let mut rr = dot(&r, &r);
    let mut rel = rr.sqrt() / b_norm;
    if rel <= cfg.tol {
        return Ok(SolveReport {
            solution: x,
            iterations: 0,
            relative_residual: rel,
            converged: true,
            trace: Vec::new(),
        });
    }
    let mut p = r.clone();
    let mut trace = Vec::new();
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // Breakdown: operator not positive definite along p, or p = 0.
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        iterations += 1;
        if iterations % RESIDUAL_REFRESH == 0 {
            apply(&x, &mut ap);
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        let rr_new = dot(&r, &r);
        rel = rr_new.sqrt() / b_norm;
        if cfg.record_trace {
            trace.push(rel);
        }
        if rel <= cfg.tol {
            break;
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Ok(SolveReport { solution: x, iterations, relative_residual: rel, converged: rel <= cfg.tol, trace })
}

/// `Σ log(λ_i + σ²)`. Negative eigenvalues are clamped to zero.
pub fn logdet_exact(eigs: &[f64], sigma2: f64) -> Result<f64> {
    if !(sigma2 >= 0.0) {
        return Err(Error::InvalidArgument("noise variance must be nonnegative".into()));
    }
    Ok(eigs.iter().map(|&l| (l.max(0.0) + sigma2).ln()).sum())
}

/// Approximates `log|K_n + σ² I|` for `n` inputs inside a grid of `m`
/// points from the `m` grid eigenvalues (nonincreasing):
/// `Σ_{i ≤ min(n,m)} log((n/m) λ_i + σ²) + max(0, n − m) log σ²`.
pub fn logdet_scaled(grid_eigs: &[f64], n: usize, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::InvalidArgument("noise variance must be positive".into()));
    }
    let m = grid_eigs.len();
    if m == 0 {
        return Ok(n as f64 * sigma2.ln());
    }
    let scale = n as f64 / m as f64;
    let head: f64 = grid_eigs.iter().take(n).map(|&l| (scale * l.max(0.0) + sigma2).ln()).sum();
    Ok(head + n.saturating_sub(m) as f64 * sigma2.ln())
}
