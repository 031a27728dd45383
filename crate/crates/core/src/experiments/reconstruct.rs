//! Covariance reconstruction: how well `K_SKI` matches a dense RBF matrix.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gp::{global_gp_weights, ski_dense};
use crate::interp::{build_w, kmeans_covering_axis, padded_grid, regular_grid, InterpScheme, ProductGrid};
use crate::kernels::Kernel;
use crate::points::Points;

use super::config::{ExperimentConfig, SchemeChoice};
use super::manifest::ModelEntry;
use super::metrics::MetricsRow;
use super::RunOutput;

pub const MAX_N: usize = 2000;

#[derive(Clone, Debug)]
pub struct ReconstructPoint {
    pub scheme: SchemeChoice,
    pub m: usize,
    pub mean_abs_error: f64,
    pub build_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct ReconstructReport {
    pub points: Vec<ReconstructPoint>,
    pub output: RunOutput,
}

impl ReconstructReport {
    pub fn error(&self, scheme: SchemeChoice, m: usize) -> Option<f64> {
        self.points.iter().find(|p| p.scheme == scheme && p.m == m).map(|p| p.mean_abs_error)
    }

    /// Errors for one scheme in sweep order.
    pub fn curve(&self, scheme: SchemeChoice) -> Vec<(usize, f64)> {
        self.points.iter().filter(|p| p.scheme == scheme).map(|p| (p.m, p.mean_abs_error)).collect()
    }
}

/// Sorted inputs drawn from `N(0, std²)`.
pub fn sample_inputs(n: usize, std: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std).expect("positive standard deviation");
    let mut x: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    x.sort_by(f64::total_cmp);
    x
}

/// Dense `K_SKI` for one scheme, plus a description of the grid used.
pub fn approximate(
    x: &Points,
    kernel: &Kernel,
    scheme: SchemeChoice,
    m: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, String)> {
    let bounds = x.bounds();
    let local = |grid: ProductGrid, s: InterpScheme, desc: String| -> Result<(DMatrix<f64>, String)> {
        let w = build_w(x, &grid, s)?;
        let u = grid.points();
        let kuu = kernel.eval_matrix(&u, &u)?;
        Ok((ski_dense(&w, &w, &kuu), desc))
    };
    match scheme {
        SchemeChoice::Linear => local(regular_grid(&bounds, &[m])?, InterpScheme::Linear, "regular".into()),
        SchemeChoice::Cubic => local(padded_grid(&bounds, &[m], 2)?, InterpScheme::Cubic, "regular padded=2".into()),
        SchemeChoice::Idw => {
            if x.dim() != 1 {
                return Err(Error::InvalidArgument("k-means grids are built per axis; reconstruction is 1D".into()));
            }
            let axis = kmeans_covering_axis(x.as_slice(), m, seed)?;
            let desc = format!("kmeans m_eff={}", axis.len());
            local(ProductGrid::new(vec![axis])?, InterpScheme::Idw, desc)
        }
        SchemeChoice::GlobalGp => {
            let u = regular_grid(&bounds, &[m])?.points();
            let (w, kuu) = global_gp_weights(x, &u, kernel)?;
            Ok((&w * kuu * w.transpose(), "regular global".into()))
        }
    }
}

pub fn run_reconstruct(cfg: &ExperimentConfig) -> Result<ReconstructReport> {
    let n = cfg.n.unwrap_or(1000);
    if n > MAX_N {
        return Err(Error::Config(format!("reconstruct builds dense n x n matrices; n must be at most {MAX_N}")));
    }
    let ell = cfg.lengthscale.unwrap_or(2.0);
    let s2 = cfg.signal_variance.unwrap_or(1.0);
    let kernel = Kernel::rbf(1, ell, s2)?;
    let x = Points::from_1d(sample_inputs(n, cfg.input_std.unwrap_or(5.0), cfg.seed));
    let truth = kernel.eval_matrix(&x, &x)?;
    let schemes = cfg.schemes.clone().unwrap_or_else(|| SchemeChoice::ALL.to_vec());
    let sweep = cfg.m_sweep.clone().unwrap_or_else(|| vec![10, 20, 40, 80, 160]);

    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &scheme in &schemes {
        // Warm-up build, not timed.
        approximate(&x, &kernel, scheme, sweep[0], cfg.seed)?;
        for &m in &sweep {
            let start = Instant::now();
            let (k, desc) = approximate(&x, &kernel, scheme, m, cfg.seed)?;
            let build_time_s = start.elapsed().as_secs_f64();
            let mae = (&k - &truth).abs().mean();
            let mut row = MetricsRow::new(scheme.name(), Some(m), build_time_s);
            row.mae = Some(mae);
            row.notes = desc;
            rows.push(row);
            points.push(ReconstructPoint { scheme, m, mean_abs_error: mae, build_time_s });
        }
    }
    let models = vec![ModelEntry { label: "true".into(), scheme: format!("exact n={n}"), kernel, noise_variance: 0.0 }];
    Ok(ReconstructReport { points, output: RunOutput { rows, models, tables: Vec::new() } })
}
