//! Subset-of-regressors and FITC approximations over inducing points `U`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_len, Error, Result};
use crate::kernels::Kernel;
use crate::points::Points;

/// Relative jitter added to `K_{U,U}` before factorizing.
pub const KUU_JITTER: f64 = 1e-8;
/// Relative jitter of the single retry.
pub const RETRY_JITTER: f64 = 1e-6;

/// Cholesky of `a + jitter·I`, retrying once with a larger jitter.
/// Both jitters are relative to `scale`. Returns the jitter that worked.
pub fn cholesky_with_retry(a: &DMatrix<f64>, first: f64, scale: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    for rel in [first, RETRY_JITTER] {
        let jitter = rel * scale;
        let mut b = a.clone();
        for i in 0..b.nrows() {
            b[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(b) {
            return Ok((c, jitter));
        }
    }
    Err(Error::NotPositiveDefinite { jitter: RETRY_JITTER * scale })
}

/// Factorized `K_{U,U}` shared by the SoR and FITC routines.
pub(crate) struct InducingFactor {
    pub chol: Cholesky<f64, Dyn>,
    pub kuu: DMatrix<f64>,
}

impl InducingFactor {
    pub fn new(u: &Points, kernel: &Kernel) -> Result<Self> {
        if u.is_empty() {
            return Err(Error::InvalidArgument("no inducing points".into()));
        }
        let mut kuu = kernel.eval_matrix(u, u)?;
        let (chol, jitter) = cholesky_with_retry(&kuu, KUU_JITTER, kernel.variance())?;
        for i in 0..kuu.nrows() {
            kuu[(i, i)] += jitter;
        }
        Ok(Self { chol, kuu })
    }

    /// `L⁻¹ K_{U,X}`, one column per point.
    pub fn whiten(&self, kernel: &Kernel, u: &Points, x: &Points) -> Result<DMatrix<f64>> {
        let kux = kernel.eval_matrix(u, x)?;
        Ok(self.chol.l_dirty().solve_lower_triangular(&kux).expect("Cholesky factor is nonsingular"))
    }
}

/// `k_SoR(x, z) = K_{x,U} K_{U,U}⁻¹ K_{U,z}`.
pub fn sor_cov(x: &[f64], z: &[f64], u: &Points, kernel: &Kernel) -> Result<f64> {
    check_len(kernel.input_dim(), x.len())?;
    let f = InducingFactor::new(u, kernel)?;
    let xz = Points::new([x, z].concat(), x.len())?;
    let v = f.whiten(kernel, u, &xz)?;
    Ok(v.column(0).dot(&v.column(1)))
}

/// `k_FITC(x, z) = k_SoR(x, z) + δ_{xz} (k(x, z) − k_SoR(x, z))`.
pub fn fitc_cov(x: &[f64], z: &[f64], u: &Points, kernel: &Kernel) -> Result<f64> {
    if x == z {
        kernel.eval(x, z)
    } else {
        sor_cov(x, z, u, kernel)
    }
}

/// Dense `K_SoR` over the rows of `x`.
pub fn sor_matrix(x: &Points, u: &Points, kernel: &Kernel) -> Result<DMatrix<f64>> {
    let f = InducingFactor::new(u, kernel)?;
    let v = f.whiten(kernel, u, x)?;
    Ok(v.transpose() * v)
}

/// Global GP interpolation weights `W_GP = K_{X,U} K_{U,U}⁻¹` together with
/// the (jittered) `K_{U,U}` they were computed against.
pub fn global_gp_weights(x: &Points, u: &Points, kernel: &Kernel) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let f = InducingFactor::new(u, kernel)?;
    let kux = kernel.eval_matrix(u, x)?;
    let wt = f.chol.solve(&kux);
    Ok((wt.transpose(), f.kuu))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowRankKind {
    Sor,
    Fitc,
}

/// Woodbury-form posterior for SoR/FITC in `O(n m²)`.
///
/// With `L Lᵀ = K_{U,U}`, `V = L⁻¹ K_{U,X}` and diagonal `Λ` (`σ²` for SoR,
/// `σ² + k(x,x) − q(x,x)` for FITC), `A = I + V Λ⁻¹ Vᵀ` carries all the
/// `m × m` algebra.
pub(crate) struct LowRankPosterior {
    kind: LowRankKind,
    u: Points,
    factor: InducingFactor,
    a_chol: Cholesky<f64, Dyn>,
    coeff: DVector<f64>,
    pub log_det: f64,
    pub quad: f64,
}

impl LowRankPosterior {
    pub fn new(kind: LowRankKind, kernel: &Kernel, u: &Points, x: &Points, y: &[f64], sigma2: f64) -> Result<Self> {
        let n = x.len();
        check_len(n, y.len())?;
        let factor = InducingFactor::new(u, kernel)?;
        let v = factor.whiten(kernel, u, x)?;
        let m = u.len();
        let k0 = kernel.variance();
        let lambda: Vec<f64> = (0..n)
            .map(|i| match kind {
                LowRankKind::Sor => sigma2,
                LowRankKind::Fitc => {
                    let q = v.column(i).norm_squared();
                    sigma2 + (k0 - q).max(0.0)
                }
            })
            .collect();
        if lambda.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidArgument("SoR/FITC need a positive noise variance".into()));
        }
        let mut vs = v.clone();
        for (i, &l) in lambda.iter().enumerate() {
            vs.column_mut(i).scale_mut(1.0 / l.sqrt());
        }
        let mut a = &vs * vs.transpose();
        for i in 0..m {
            a[(i, i)] += 1.0;
        }
        let a_chol = Cholesky::new(a).ok_or(Error::NotPositiveDefinite { jitter: 0.0 })?;
        let y_over: DVector<f64> = DVector::from_iterator(n, y.iter().zip(&lambda).map(|(yi, l)| yi / l));
        let rhs = &v * &y_over;
        let coeff = a_chol.solve(&rhs);
        let quad = y.iter().zip(&lambda).map(|(yi, l)| yi * yi / l).sum::<f64>() - rhs.dot(&coeff);
        let log_det = 2.0 * a_chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>()
            + lambda.iter().map(|l| l.ln()).sum::<f64>();
        Ok(Self { kind, u: u.clone(), factor, a_chol, coeff, log_det, quad })
    }

    pub fn predict_mean(&self, kernel: &Kernel, xs: &Points) -> Result<Vec<f64>> {
        let qs = self.factor.whiten(kernel, &self.u, xs)?;
        Ok((qs.transpose() * &self.coeff).as_slice().to_vec())
    }

    pub fn predict_variance(&self, kernel: &Kernel, xs: &Points) -> Result<Vec<f64>> {
        let qs = self.factor.whiten(kernel, &self.u, xs)?;
        let sol = self.a_chol.solve(&qs);
        let k0 = kernel.variance();
        Ok((0..xs.len())
            .map(|i| {
                let q = qs.column(i);
                let explained = q.dot(&sol.column(i));
                let v = match self.kind {
                    LowRankKind::Sor => explained,
                    LowRankKind::Fitc => k0 - q.norm_squared() + explained,
                };
                v.max(0.0)
            })
            .collect())
    }
}
