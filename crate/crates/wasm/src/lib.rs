//! WebAssembly bindings for the browser demo in `www/`.

use skigp::experiments::reconstruct::{approximate, sample_inputs};
use skigp::experiments::SchemeChoice;
use skigp::gp::{Dataset, GpModel, Scheme, SkiSpec};
use skigp::interp::{build_w, padded_grid, InterpScheme};
use skigp::kernels::Kernel;
use skigp::Points;
use wasm_bindgen::prelude::*;

fn js_err(e: skigp::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Mean absolute error between `K_SKI` and the exact RBF covariance for each
/// grid size in `ms`, on `n` sorted inputs drawn from `N(0, 25)`.
#[wasm_bindgen]
pub fn reconstruction_errors(
    n: usize,
    lengthscale: f64,
    scheme: &str,
    ms: &[u32],
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    let scheme = SchemeChoice::parse(scheme).map_err(js_err)?;
    let kernel = Kernel::rbf(1, lengthscale, 1.0).map_err(js_err)?;
    let x = Points::from_1d(sample_inputs(n, 5.0, seed));
    let truth = kernel.eval_matrix(&x, &x).map_err(js_err)?;
    ms.iter()
        .map(|&m| {
            let (k, _) = approximate(&x, &kernel, scheme, m as usize, seed).map_err(js_err)?;
            Ok((&k - &truth).abs().mean())
        })
        .collect()
}

/// SKI regression in 1D with an RBF kernel and cubic interpolation on an
/// `m`-point grid. Returns predictive means followed by variances, one of
/// each per entry of `test`.
#[wasm_bindgen]
pub fn ski_regression(
    x: &[f64],
    y: &[f64],
    test: &[f64],
    m: usize,
    lengthscale: f64,
    noise_variance: f64,
) -> Result<Vec<f64>, JsError> {
    let train = Points::from_1d(x.to_vec());
    let xs = Points::from_1d(test.to_vec());
    let lo = x.iter().chain(test).copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().chain(test).copied().fold(f64::NEG_INFINITY, f64::max);
    let grid = padded_grid(&[(lo, hi)], &[m], 2).map_err(js_err)?;
    let kernel = Kernel::rbf(1, lengthscale, 1.0).map_err(js_err)?;
    let data = Dataset::new(train, y.to_vec()).map_err(js_err)?;
    let scheme = Scheme::Ski(SkiSpec::new(grid, InterpScheme::Cubic));
    let model = GpModel::new(data, kernel, noise_variance, scheme).map_err(js_err)?.with_empirical_mean();
    let post = model.fit().map_err(js_err)?;
    let mut out = post.predict_mean(&xs).map_err(js_err)?.value;
    out.extend(post.predict_variance(&xs).map_err(js_err)?.value);
    Ok(out)
}

/// Interpolation weights of the point `x` on an `m`-point grid spanning
/// `[lo, hi]`, as interleaved `(grid index, weight)` pairs.
#[wasm_bindgen]
pub fn interpolation_weights(x: f64, lo: f64, hi: f64, m: usize, scheme: &str) -> Result<Vec<f64>, JsError> {
    let scheme = InterpScheme::parse(scheme).map_err(js_err)?;
    let pad = if scheme == InterpScheme::Cubic { 2 } else { 0 };
    let grid = padded_grid(&[(lo, hi)], &[m], pad).map_err(js_err)?;
    let w = build_w(&Points::from_1d(vec![x]), &grid, scheme).map_err(js_err)?;
    let (idx, vals) = w.row(0);
    Ok(idx.iter().zip(vals).flat_map(|(&i, &v)| [i as f64, v]).collect())
}

/// Grid node positions used by [`interpolation_weights`].
#[wasm_bindgen]
pub fn grid_nodes(lo: f64, hi: f64, m: usize, scheme: &str) -> Result<Vec<f64>, JsError> {
    let scheme = InterpScheme::parse(scheme).map_err(js_err)?;
    let pad = if scheme == InterpScheme::Cubic { 2 } else { 0 };
    Ok(padded_grid(&[(lo, hi)], &[m], pad).map_err(js_err)?.axis(0).to_vec())
}
