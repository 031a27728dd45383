use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, Error, Result};
use crate::interp::{build_w, InterpScheme, ProductGrid};
use crate::kernels::Kernel;
use crate::points::Points;
use crate::structla::kron_matvec;

use super::inducing::{cholesky_with_retry, KUU_JITTER};

/// Draws `count` prior samples at `x` as `W (L₁ ⊗ … ⊗ L_P) ν` with
/// `L_p L_pᵀ = K_p` the per-axis grid covariances and `ν ~ N(0, I)`.
/// The full Kronecker factor is never formed.
pub fn sample_prior(
    x: &Points,
    grid: &ProductGrid,
    interp: InterpScheme,
    kernel: &Kernel,
    seed: u64,
    count: usize,
) -> Result<Vec<Vec<f64>>> {
    check_len(grid.dim(), kernel.input_dim())?;
    let factors = if grid.dim() == 1 {
        vec![kernel.clone()]
    } else {
        kernel.axis_factors().ok_or_else(|| Error::Structure("kernel does not factor over grid axes".into()))?
    };
    let chols: Vec<DMatrix<f64>> = factors
        .iter()
        .zip(grid.axes())
        .map(|(k, axis)| {
            let pts = Points::from_1d(axis.clone());
            let kp = k.eval_matrix(&pts, &pts)?;
            let (c, _) = cholesky_with_retry(&kp, KUU_JITTER, k.variance())?;
            Ok(c.l())
        })
        .collect::<Result<_>>()?;
    let w = build_w(x, grid, interp)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = grid.size();
    (0..count)
        .map(|_| {
            let nu: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
            let f = kron_matvec(&chols, &nu, false)?;
            w.spmv(&f)
        })
        .collect()
}
