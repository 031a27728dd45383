//! Inducing-point grids and sparse interpolation weights.
//!
//! A training input `x` is mapped onto the grid by a row of `W` holding
//! `c^D` weights: `c = 2` for linear and inverse-distance weighting, `c = 4`
//! for cubic convolution. Rows always sum to one.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::kernels::is_equispaced;
use crate::points::Points;

/// Cartesian product of sorted one-dimensional axes. Flat indices run with
/// the last axis fastest, matching `K_1 ⊗ … ⊗ K_D`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductGrid {
    axes: Vec<Vec<f64>>,
    equispaced: Vec<bool>,
}

impl ProductGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument("grid needs at least one axis".into()));
        }
        for (p, a) in axes.iter().enumerate() {
            if a.len() < 2 {
                return Err(Error::InvalidArgument(format!("axis {p} needs at least two points")));
            }
            if a.iter().any(|v| !v.is_finite()) || a.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidArgument(format!("axis {p} is not strictly increasing")));
            }
        }
        let equispaced = axes.iter().map(|a| is_equispaced(a)).collect();
        Ok(Self { axes, equispaced })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn axis(&self, p: usize) -> &[f64] {
        &self.axes[p]
    }

    pub fn equispaced(&self) -> &[bool] {
        &self.equispaced
    }

    pub fn axis_sizes(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    /// Total number of grid points `m`.
    pub fn size(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a[0], a[a.len() - 1])).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.axes.iter().zip(x).all(|(a, &v)| v >= a[0] && v <= a[a.len() - 1])
    }

    /// All grid nodes as points, in flat-index order.
    pub fn points(&self) -> Points {
        let m = self.size();
        let d = self.dim();
        let sizes = self.axis_sizes();
        let mut data = Vec::with_capacity(m * d);
        let mut idx = vec![0usize; d];
        for _ in 0..m {
            for p in 0..d {
                data.push(self.axes[p][idx[p]]);
            }
            for p in (0..d).rev() {
                idx[p] += 1;
                if idx[p] < sizes[p] {
                    break;
                }
                idx[p] = 0;
            }
        }
        Points::new(data, d).expect("grid dimension is positive")
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
    v[n - 1] = hi;
    v
}

/// Equispaced grid from `lo` to `hi` inclusive on every axis.
pub fn regular_grid(bounds: &[(f64, f64)], points_per_axis: &[usize]) -> Result<ProductGrid> {
    check_len(bounds.len(), points_per_axis.len())?;
    let mut axes = Vec::with_capacity(bounds.len());
    for (&(lo, hi), &n) in bounds.iter().zip(points_per_axis) {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!("degenerate bounds ({lo}, {hi})")));
        }
        if n < 2 {
            return Err(Error::InvalidArgument("each axis needs at least two points".into()));
        }
        axes.push(linspace(lo, hi, n));
    }
    ProductGrid::new(axes)
}

/// Equispaced grid of `points_per_axis` nodes whose spacing leaves
/// `pad_cells` cells beyond the data bounds on both sides of every axis.
pub fn padded_grid(bounds: &[(f64, f64)], points_per_axis: &[usize], pad_cells: usize) -> Result<ProductGrid> {
    check_len(bounds.len(), points_per_axis.len())?;
    let mut padded = Vec::with_capacity(bounds.len());
    for (&(lo, hi), &n) in bounds.iter().zip(points_per_axis) {
        if n < 2 * pad_cells + 2 {
            return Err(Error::InvalidArgument(format!("{n} points cannot hold {pad_cells} padding cells per side")));
        }
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        let h = (hi - lo) / (n - 1 - 2 * pad_cells) as f64;
        padded.push((lo - pad_cells as f64 * h, hi + pad_cells as f64 * h));
    }
    regular_grid(&padded, points_per_axis)
}

/// Sorted cluster centres of one-dimensional data from Lloyd's algorithm
/// with k-means++ seeding.
pub fn kmeans_axis(x: &[f64], m: usize, seed: u64) -> Result<Vec<f64>> {
    const MAX_ITERS: usize = 100;
    if m < 2 {
        return Err(Error::InvalidArgument("k-means needs at least two centres".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("k-means input must be finite".into()));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();
    if m > distinct.len() {
        return Err(Error::InvalidArgument(format!("{m} centres requested from {} distinct values", distinct.len())));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = Vec::with_capacity(m);
    centers.push(sorted[rng.random_range(0..sorted.len())]);
    let mut d2: Vec<f64> = sorted.iter().map(|&v| (v - centers[0]).powi(2)).collect();
    while centers.len() < m {
        let total: f64 = d2.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut pick = d2.iter().rposition(|&d| d > 0.0).expect("distinct values remain");
        for (i, &d) in d2.iter().enumerate() {
            if d > 0.0 && target < d {
                pick = i;
                break;
            }
            target -= d;
        }
        let c = sorted[pick];
        centers.push(c);
        for (di, &v) in d2.iter_mut().zip(&sorted) {
            *di = di.min((v - c).powi(2));
        }
    }

    let mut assign = vec![usize::MAX; sorted.len()];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for (a, &v) in assign.iter_mut().zip(&sorted) {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (k, &c) in centers.iter().enumerate() {
                let d = (v - c).abs();
                if d < best_d {
                    best_d = d;
                    best = k;
                }
            }
            if *a != best {
                *a = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; m];
        let mut counts = vec![0usize; m];
        for (&a, &v) in assign.iter().zip(&sorted) {
            sums[a] += v;
            counts[a] += 1;
        }
        for k in 0..m {
            if counts[k] > 0 {
                centers[k] = sums[k] / counts[k] as f64;
            }
        }
    }
    centers.sort_by(f64::total_cmp);
    Ok(centers)
}

/// Irregular axis of `m` points: `m − 2` k-means centres plus the data
/// minimum and maximum, so every input lies inside the axis.
pub fn kmeans_covering_axis(x: &[f64], m: usize, seed: u64) -> Result<Vec<f64>> {
    if m < 4 {
        return Err(Error::InvalidArgument("covering k-means axis needs m ≥ 4".into()));
    }
    let mut axis = kmeans_axis(x, m - 2, seed)?;
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    axis.push(lo);
    axis.push(hi);
    axis.sort_by(f64::total_cmp);
    axis.dedup();
    Ok(axis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InterpScheme {
    Linear,
    Cubic,
    Idw,
}

impl InterpScheme {
    /// Nonzeros per row per dimension.
    pub fn stencil(self) -> usize {
        match self {
            InterpScheme::Linear | InterpScheme::Idw => 2,
            InterpScheme::Cubic => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InterpScheme::Linear => "linear",
            InterpScheme::Cubic => "cubic",
            InterpScheme::Idw => "idw",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "linear" => Ok(InterpScheme::Linear),
            "cubic" => Ok(InterpScheme::Cubic),
            "idw" => Ok(InterpScheme::Idw),
            other => Err(Error::Config(format!("unknown interpolation scheme `{other}`"))),
        }
    }
}

/// Cell `j` with `axis[j] ≤ x < axis[j+1]`; the right end maps to the last cell.
fn locate(x: f64, axis: &[f64]) -> Result<usize> {
    let (lo, hi) = (axis[0], axis[axis.len() - 1]);
    if !(x >= lo && x <= hi) {
        return Err(Error::OutOfRange { value: x, lo, hi });
    }
    let j = axis.partition_point(|&u| u <= x);
    Ok(j.saturating_sub(1).min(axis.len() - 2))
}

pub fn linear_weights(x: f64, axis: &[f64]) -> Result<([usize; 2], [f64; 2])> {
    let j = locate(x, axis)?;
    let (a, b) = (axis[j], axis[j + 1]);
    let wb = (x - a) / (b - a);
    Ok(([j, j + 1], [1.0 - wb, wb]))
}

pub fn idw_weights(x: f64, axis: &[f64]) -> Result<([usize; 2], [f64; 2])> {
    let j = locate(x, axis)?;
    let (da, db) = (x - axis[j], axis[j + 1] - x);
    if da == 0.0 {
        return Ok(([j, j + 1], [1.0, 0.0]));
    }
    if db == 0.0 {
        return Ok(([j, j + 1], [0.0, 1.0]));
    }
    let (ia, ib) = (1.0 / da, 1.0 / db);
    let wa = ia / (ia + ib);
    Ok(([j, j + 1], [wa, 1.0 - wa]))
}

const KEYS_A: f64 = -0.5;

/// Keys cubic convolution kernel with `a = −1/2`.
pub fn keys_kernel(s: f64) -> f64 {
    let s = s.abs();
    if s <= 1.0 {
        ((KEYS_A + 2.0) * s - (KEYS_A + 3.0)) * s * s + 1.0
    } else if s < 2.0 {
        ((KEYS_A * s - 5.0 * KEYS_A) * s + 8.0 * KEYS_A) * s - 4.0 * KEYS_A
    } else {
        0.0
    }
}

/// Four-point cubic convolution weights. Cells whose centred stencil would
/// leave the axis use the inward-shifted stencil with cubic Lagrange weights.
pub fn cubic_weights(x: f64, axis: &[f64]) -> Result<([usize; 4], [f64; 4])> {
    if axis.len() < 4 {
        return Err(Error::Structure("cubic interpolation needs at least four grid points".into()));
    }
    if !is_equispaced(axis) {
        return Err(Error::Structure("cubic interpolation needs an equispaced axis".into()));
    }
    let j = locate(x, axis)?;
    if j >= 1 && j + 2 < axis.len() {
        let t = (x - axis[j]) / (axis[j + 1] - axis[j]);
        let w = [keys_kernel(1.0 + t), keys_kernel(t), keys_kernel(1.0 - t), keys_kernel(2.0 - t)];
        return Ok(([j - 1, j, j + 1, j + 2], w));
    }
    let k = j.saturating_sub(1).min(axis.len() - 4);
    let nodes = [axis[k], axis[k + 1], axis[k + 2], axis[k + 3]];
    let mut w = [1.0; 4];
    for i in 0..4 {
        for l in 0..4 {
            if l != i {
                w[i] *= (x - nodes[l]) / (nodes[i] - nodes[l]);
            }
        }
    }
    Ok(([k, k + 1, k + 2, k + 3], w))
}

fn axis_weights(scheme: InterpScheme, x: f64, axis: &[f64], idx: &mut Vec<usize>, w: &mut Vec<f64>) -> Result<()> {
    idx.clear();
    w.clear();
    match scheme {
        InterpScheme::Linear => {
            let (i, v) = linear_weights(x, axis)?;
            idx.extend_from_slice(&i);
            w.extend_from_slice(&v);
        }
        InterpScheme::Idw => {
            let (i, v) = idw_weights(x, axis)?;
            idx.extend_from_slice(&i);
            w.extend_from_slice(&v);
        }
        InterpScheme::Cubic => {
            let (i, v) = cubic_weights(x, axis)?;
            idx.extend_from_slice(&i);
            w.extend_from_slice(&v);
        }
    }
    Ok(())
}

/// Row-sparse `n × m` interpolation matrix with a fixed number of stored
/// entries per row. Stored entries may be zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseWeights {
    n_rows: usize,
    n_cols: usize,
    per_row: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseWeights {
    pub fn from_parts(
        n_rows: usize,
        n_cols: usize,
        per_row: usize,
        indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_len(n_rows * per_row, indices.len())?;
        check_len(n_rows * per_row, values.len())?;
        if indices.iter().any(|&c| c >= n_cols) {
            return Err(Error::InvalidArgument("column index out of range".into()));
        }
        Ok(Self { n_rows, n_cols, per_row, indices, values })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn per_row(&self) -> usize {
        self.per_row
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = i * self.per_row..(i + 1) * self.per_row;
        (&self.indices[r.clone()], &self.values[r])
    }

    pub fn spmv(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_rows];
        self.spmv_into(v, &mut out)?;
        Ok(out)
    }

    pub fn spmv_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n_cols, v.len())?;
        check_len(self.n_rows, out.len())?;
        for ((o, idx), w) in
            out.iter_mut().zip(self.indices.chunks_exact(self.per_row)).zip(self.values.chunks_exact(self.per_row))
        {
            *o = idx.iter().zip(w).map(|(&c, &wc)| wc * v[c]).sum();
        }
        Ok(())
    }

    pub fn spmv_t(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n_cols];
        self.spmv_t_into(v, &mut out)?;
        Ok(out)
    }

    /// `out = Wᵀ v`, accumulated row by row in index order.
    pub fn spmv_t_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n_rows, v.len())?;
        check_len(self.n_cols, out.len())?;
        out.fill(0.0);
        for ((&vi, idx), w) in
            v.iter().zip(self.indices.chunks_exact(self.per_row)).zip(self.values.chunks_exact(self.per_row))
        {
            for (&c, &wc) in idx.iter().zip(w) {
                out[c] += wc * vi;
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (idx, w) = self.row(i);
            for (&c, &wc) in idx.iter().zip(w) {
                d[(i, c)] += wc;
            }
        }
        d
    }

    /// Writes one `row col value` triplet per stored entry.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# {} {} {}", self.n_rows, self.n_cols, self.per_row)?;
        for i in 0..self.n_rows {
            let (idx, w) = self.row(i);
            for (&c, &wc) in idx.iter().zip(w) {
                writeln!(out, "{i} {c} {wc:e}")?;
            }
        }
        Ok(())
    }
}

/// Interpolation matrix from the inputs onto `grid`.
pub fn build_w(x: &Points, grid: &ProductGrid, scheme: InterpScheme) -> Result<SparseWeights> {
    check_len(grid.dim(), x.dim())?;
    if scheme == InterpScheme::Cubic {
        if let Some(p) = grid.equispaced().iter().position(|&e| !e) {
            return Err(Error::Structure(format!("cubic interpolation needs an equispaced axis {p}")));
        }
    }
    let d = grid.dim();
    let c = scheme.stencil();
    let per_row = c.pow(d as u32);
    let sizes = grid.axis_sizes();
    let mut strides = vec![1usize; d];
    for p in (0..d.saturating_sub(1)).rev() {
        strides[p] = strides[p + 1] * sizes[p + 1];
    }
    let n = x.len();
    let mut indices = vec![0usize; n * per_row];
    let mut values = vec![0.0; n * per_row];

    let fill_row = |i: usize, idx_out: &mut [usize], w_out: &mut [f64]| -> Result<()> {
        let xi = x.row(i);
        let mut axis_idx: Vec<Vec<usize>> = vec![Vec::with_capacity(c); d];
        let mut axis_w: Vec<Vec<f64>> = vec![Vec::with_capacity(c); d];
        for p in 0..d {
            axis_weights(scheme, xi[p], grid.axis(p), &mut axis_idx[p], &mut axis_w[p])?;
        }
        let mut digits = vec![0usize; d];
        for e in 0..per_row {
            let mut flat = 0;
            let mut w = 1.0;
            for p in 0..d {
                flat += axis_idx[p][digits[p]] * strides[p];
                w *= axis_w[p][digits[p]];
            }
            idx_out[e] = flat;
            w_out[e] = w;
            for p in (0..d).rev() {
                digits[p] += 1;
                if digits[p] < c {
                    break;
                }
                digits[p] = 0;
            }
        }
        Ok(())
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        indices
            .par_chunks_mut(per_row)
            .zip(values.par_chunks_mut(per_row))
            .enumerate()
            .try_for_each(|(i, (io, wo))| fill_row(i, io, wo))?;
    }
    #[cfg(not(feature = "parallel"))]
    for (i, (io, wo)) in indices.chunks_mut(per_row).zip(values.chunks_mut(per_row)).enumerate() {
        fill_row(i, io, wo)?;
    }

    SparseWeights::from_parts(n, grid.size(), per_row, indices, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_axis(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn regular_grid_cases() {
        let g = regular_grid(&[(0.0, 10.0)], &[11]).unwrap();
        assert_eq!(g.axis(0), unit_axis(11).as_slice());
        assert!(g.equispaced()[0]);
        let g = regular_grid(&[(-3.0, 4.0), (1.0, 2.0)], &[100, 100]).unwrap();
        assert_eq!(g.size(), 10_000);
        assert!(regular_grid(&[(0.0, 1.0)], &[1]).is_err());
        assert!(regular_grid(&[(1.0, 1.0)], &[5]).is_err());
    }

    #[test]
    fn padded_grid_leaves_two_cells() {
        let g = padded_grid(&[(0.0, 10.0)], &[15], 2).unwrap();
        let a = g.axis(0);
        let h = a[1] - a[0];
        assert!((a[2] - 0.0).abs() < 1e-12 && (a[12] - 10.0).abs() < 1e-12);
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn grid_points_follow_kron_order() {
        let g = ProductGrid::new(vec![vec![0.0, 1.0], vec![5.0, 6.0, 7.0]]).unwrap();
        let p = g.points();
        assert_eq!(p.row(0), &[0.0, 5.0]);
        assert_eq!(p.row(2), &[0.0, 7.0]);
        assert_eq!(p.row(3), &[1.0, 5.0]);
    }

    #[test]
    fn kmeans_separated_clusters() {
        assert_eq!(kmeans_axis(&[0.0, 0.0, 10.0, 10.0], 2, 3).unwrap(), vec![0.0, 10.0]);
        assert!(kmeans_axis(&[1.0, 1.0, 2.0], 3, 0).is_err());
        assert!(kmeans_axis(&[1.0, 2.0], 1, 0).is_err());
    }

    #[test]
    fn kmeans_is_deterministic_and_covering() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..1000).map(|_| rng.random_range(-5.0..5.0)).collect();
        let a = kmeans_axis(&x, 40, 9).unwrap();
        let b = kmeans_axis(&x, 40, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        let axis = kmeans_covering_axis(&x, 42, 9).unwrap();
        assert!(x.iter().all(|&v| v >= axis[0] && v <= axis[axis.len() - 1]));
    }

    #[test]
    fn linear_weight_cases() {
        let axis = unit_axis(11);
        let (i, w) = linear_weights(3.4, &axis).unwrap();
        assert_eq!(i, [3, 4]);
        assert!((w[0] - 0.6).abs() < 1e-12 && (w[1] - 0.4).abs() < 1e-12);
        assert_eq!(linear_weights(5.0, &axis).unwrap(), ([5, 6], [1.0, 0.0]));
        assert_eq!(linear_weights(0.0, &axis).unwrap(), ([0, 1], [1.0, 0.0]));
        assert_eq!(linear_weights(10.0, &axis).unwrap(), ([9, 10], [0.0, 1.0]));
        assert!(matches!(linear_weights(10.5, &axis), Err(Error::OutOfRange { .. })));
        assert!(linear_weights(f64::NAN, &axis).is_err());
    }

    #[test]
    fn idw_weight_cases() {
        let axis = [0.0, 3.0, 4.0];
        let (i, w) = idw_weights(1.0, &axis).unwrap();
        assert_eq!(i, [0, 1]);
        // (1/1)/(1/1 + 1/2) and (1/2)/(3/2)
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-15 && (w[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(idw_weights(3.0, &axis).unwrap().1, [1.0, 0.0]);
        assert_eq!(idw_weights(1.5, &axis).unwrap().1, [0.5, 0.5]);
        assert!(idw_weights(-0.1, &axis).is_err());
    }

    #[test]
    fn keys_kernel_values() {
        assert_eq!(keys_kernel(0.0), 1.0);
        assert_eq!(keys_kernel(1.0), 0.0);
        assert_eq!(keys_kernel(-1.0), 0.0);
        assert_eq!(keys_kernel(2.0), 0.0);
        assert!((keys_kernel(0.5) - 0.5625).abs() < 1e-15);
        assert!((keys_kernel(1.5) + 0.0625).abs() < 1e-15);
    }

    #[test]
    fn cubic_weight_cases() {
        let axis = unit_axis(11);
        assert_eq!(cubic_weights(4.0, &axis).unwrap(), ([3, 4, 5, 6], [0.0, 1.0, 0.0, 0.0]));
        let (i, w) = cubic_weights(4.5, &axis).unwrap();
        assert_eq!(i, [3, 4, 5, 6]);
        let expect = [-0.0625, 0.5625, 0.5625, -0.0625];
        for k in 0..4 {
            assert!((w[k] - expect[k]).abs() < 1e-15);
        }
        // The midpoint weights interpolate t³ exactly.
        let interp: f64 = i.iter().zip(&w).map(|(&j, wj)| (j as f64).powi(3) * wj).sum();
        assert!((interp - 4.5f64.powi(3)).abs() < 1e-12);
        assert!(matches!(cubic_weights(1.0, &[0.0, 1.0, 3.0, 4.0]), Err(Error::Structure(_))));
        assert!(cubic_weights(1.0, &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn cubic_boundary_stencil_shifts_inward() {
        let axis = unit_axis(8);
        let (i, w) = cubic_weights(0.3, &axis).unwrap();
        assert_eq!(i, [0, 1, 2, 3]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let (i, w) = cubic_weights(6.7, &axis).unwrap();
        assert_eq!(i, [4, 5, 6, 7]);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert_eq!(cubic_weights(7.0, &axis).unwrap().1, [0.0, 0.0, 0.0, 1.0]);
        assert_eq!(cubic_weights(0.0, &axis).unwrap().1, [1.0, 0.0, 0.0, 0.0]);
    }

    fn interpolate(scheme: InterpScheme, axis: &[f64], x: f64, f: impl Fn(f64) -> f64) -> f64 {
        let mut idx = Vec::new();
        let mut w = Vec::new();
        axis_weights(scheme, x, axis, &mut idx, &mut w).unwrap();
        idx.iter().zip(&w).map(|(&j, wj)| f(axis[j]) * wj).sum()
    }

    #[test]
    fn polynomial_reproduction() {
        let axis: Vec<f64> = (0..30).map(|i| -1.5 + 0.25 * i as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let x = rng.random_range(axis[1]..axis[28]);
            // Keys convolution reproduces quadratics; linear reproduces lines.
            let q = |t: f64| 2.0 - 3.0 * t + 0.7 * t * t;
            assert!((interpolate(InterpScheme::Cubic, &axis, x, q) - q(x)).abs() < 1e-10);
            assert!((interpolate(InterpScheme::Linear, &axis, x, |t| 3.0 * t - 1.0) - (3.0 * x - 1.0)).abs() < 1e-12);
            // Boundary cells use Lagrange weights, exact for cubics.
            let xb = rng.random_range(axis[0]..axis[1]);
            assert!((interpolate(InterpScheme::Cubic, &axis, xb, |t| t.powi(3)) - xb.powi(3)).abs() < 1e-10);
        }
    }

    #[test]
    fn build_w_on_nodes_is_selection() {
        let grid = regular_grid(&[(0.0, 10.0)], &[11]).unwrap();
        let x = Points::from_1d(vec![3.0, 0.0, 10.0, 7.0]);
        for scheme in [InterpScheme::Linear, InterpScheme::Cubic, InterpScheme::Idw] {
            let w = build_w(&x, &grid, scheme).unwrap();
            let d = w.to_dense();
            for (i, &node) in [3usize, 0, 10, 7].iter().enumerate() {
                for j in 0..11 {
                    assert_eq!(d[(i, j)], if j == node { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn build_w_counts_and_errors() {
        let grid = regular_grid(&[(0.0, 9.0), (0.0, 9.0)], &[10, 10]).unwrap();
        let x = Points::new(vec![4.3, 5.7], 2).unwrap();
        let w = build_w(&x, &grid, InterpScheme::Cubic).unwrap();
        assert_eq!(w.per_row(), 16);
        assert_eq!(w.n_cols(), 100);
        let outside = Points::new(vec![4.3, 9.5], 2).unwrap();
        assert!(matches!(build_w(&outside, &grid, InterpScheme::Linear), Err(Error::OutOfRange { .. })));
        let irregular = ProductGrid::new(vec![vec![0.0, 1.0, 3.0, 4.0, 6.0]]).unwrap();
        assert!(matches!(
            build_w(&Points::from_1d(vec![2.0]), &irregular, InterpScheme::Cubic),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn spmv_against_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = regular_grid(&[(0.0, 1.0)], &[300]).unwrap();
        let x = Points::from_1d((0..200).map(|_| rng.random_range(0.0..1.0)).collect());
        let w = build_w(&x, &grid, InterpScheme::Cubic).unwrap();
        let d = w.to_dense();
        let v: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
        let u: Vec<f64> = (0..200).map(|_| rng.random_range(-1.0..1.0)).collect();
        let wv = w.spmv(&v).unwrap();
        let dv = &d * nalgebra::DVector::from_column_slice(&v);
        let scale = dv.norm();
        for i in 0..200 {
            assert!((wv[i] - dv[i]).abs() <= 1e-13 * scale);
        }
        let wtu = w.spmv_t(&u).unwrap();
        let lhs: f64 = wv.iter().zip(&u).map(|(a, b)| a * b).sum();
        let rhs: f64 = v.iter().zip(&wtu).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
        assert!(matches!(w.spmv(&u), Err(Error::Dimension { .. })));
        assert!(w.spmv_t(&v).is_err());
    }

    #[test]
    fn selection_matrix_gathers() {
        let grid = regular_grid(&[(0.0, 4.0)], &[5]).unwrap();
        let w = build_w(&Points::from_1d(vec![1.0, 3.0]), &grid, InterpScheme::Linear).unwrap();
        assert_eq!(w.spmv(&[10.0, 11.0, 12.0, 13.0, 14.0]).unwrap(), vec![11.0, 13.0]);
    }

    #[test]
    fn triplet_export() {
        let grid = regular_grid(&[(0.0, 4.0)], &[5]).unwrap();
        let w = build_w(&Points::from_1d(vec![1.5]), &grid, InterpScheme::Linear).unwrap();
        let mut buf = Vec::new();
        w.write_triplets(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "# 1 5 2\n0 1 5e-1\n0 2 5e-1\n");
    }

    proptest! {
        #[test]
        fn rows_sum_to_one(xs in proptest::collection::vec((-4.0f64..4.0, -2.0f64..2.0), 1..40)) {
            let grid = regular_grid(&[(-4.0, 4.0), (-2.0, 2.0)], &[17, 9]).unwrap();
            let idw_grid = ProductGrid::new(vec![
                vec![-4.0, -3.0, -1.5, 0.0, 0.2, 2.0, 4.0],
                vec![-2.0, -0.5, 0.5, 2.0],
            ]).unwrap();
            let flat: Vec<f64> = xs.iter().flat_map(|&(a, b)| [a, b]).collect();
            let x = Points::new(flat, 2).unwrap();
            for (g, scheme) in [(&grid, InterpScheme::Linear), (&grid, InterpScheme::Cubic), (&idw_grid, InterpScheme::Idw)] {
                let w = build_w(&x, g, scheme).unwrap();
                prop_assert_eq!(w.per_row(), scheme.stencil().pow(2));
                for i in 0..x.len() {
                    let (idx, vals) = w.row(i);
                    prop_assert!((vals.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                    prop_assert!(idx.iter().all(|&c| c < g.size()));
                    if scheme != InterpScheme::Cubic {
                        prop_assert!(vals.iter().all(|&v| (0.0..=1.0).contains(&v)));
                    }
                }
            }
        }

        #[test]
        fn node_inputs_give_one_hot_rows(i in 0usize..17, j in 0usize..9) {
            let grid = regular_grid(&[(-4.0, 4.0), (-2.0, 2.0)], &[17, 9]).unwrap();
            let x = Points::new(vec![grid.axis(0)[i], grid.axis(1)[j]], 2).unwrap();
            for scheme in [InterpScheme::Linear, InterpScheme::Cubic, InterpScheme::Idw] {
                let w = build_w(&x, &grid, scheme).unwrap();
                let (idx, vals) = w.row(0);
                let mut hot = 0;
                for (&c, &v) in idx.iter().zip(vals) {
                    if v != 0.0 {
                        prop_assert_eq!(v, 1.0);
                        prop_assert_eq!(c, i * 9 + j);
                        hot += 1;
                    }
                }
                prop_assert_eq!(hot, 1);
            }
        }
    }
}
