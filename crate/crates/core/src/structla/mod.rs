//! Structured representations of the inducing covariance `K_{U,U}`.
//!
//! A one-dimensional stationary kernel on an equispaced axis gives a
//! symmetric Toeplitz matrix; a kernel that factorizes over coordinates on a
//! product grid gives a Kronecker product of per-axis factors. Both admit
//! matvecs far cheaper than the dense `O(m²)`.

mod toeplitz;

use nalgebra::DMatrix;

pub use toeplitz::SymmetricToeplitz;

use crate::error::{check_len, Error, Result};
use crate::interp::ProductGrid;
use crate::kernels::{toeplitz_column, Kernel};

/// Largest matrix `to_dense` will expand.
pub const DENSE_EXPORT_CAP: usize = 4096;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum StructuredKuu {
    Dense(DMatrix<f64>),
    Toeplitz(SymmetricToeplitz),
    Kronecker(Vec<StructuredKuu>),
}

/// Requested representation when building `K_{U,U}` from a kernel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KuuStructure {
    /// Toeplitz for equispaced axes, Kronecker across axes when the kernel
    /// separates, dense otherwise.
    Auto,
    Dense,
}

fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

impl StructuredKuu {
    pub fn dense(a: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Structure(format!("{}×{} matrix is not square", a.nrows(), a.ncols())));
        }
        let scale = a.amax().max(1.0);
        if max_asymmetry(&a) > SYMMETRY_TOL * scale {
            return Err(Error::Structure("matrix is not symmetric".into()));
        }
        Ok(Self::Dense(a))
    }

    pub fn toeplitz(column: Vec<f64>) -> Result<Self> {
        Ok(Self::Toeplitz(SymmetricToeplitz::new(column)?))
    }

    pub fn kronecker(factors: Vec<StructuredKuu>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("Kronecker product needs at least one factor".into()));
        }
        Ok(Self::Kronecker(factors))
    }

    /// `K_{U,U}` for `kernel` on `grid`.
    pub fn from_kernel(kernel: &Kernel, grid: &ProductGrid, structure: KuuStructure) -> Result<Self> {
        check_len(kernel.input_dim(), grid.dim())?;
        if structure == KuuStructure::Auto {
            if grid.dim() == 1 {
                if grid.equispaced()[0] {
                    return Self::toeplitz(toeplitz_column(kernel, grid.axis(0))?);
                }
            } else if let Some(factors) = kernel.axis_factors() {
                let parts = factors
                    .iter()
                    .zip(grid.axes())
                    .map(|(k, axis)| {
                        let sub = ProductGrid::new(vec![axis.clone()])?;
                        Self::from_kernel(k, &sub, KuuStructure::Auto)
                    })
                    .collect::<Result<Vec<_>>>()?;
                return Self::kronecker(parts);
            }
        }
        let u = grid.points();
        Self::dense(kernel.eval_matrix(&u, &u)?)
    }

    /// Matrix size `m`.
    pub fn size(&self) -> usize {
        match self {
            Self::Dense(a) => a.nrows(),
            Self::Toeplitz(t) => t.size(),
            Self::Kronecker(f) => f.iter().map(Self::size).product(),
        }
    }

    pub fn diagonal_value(&self, i: usize) -> f64 {
        match self {
            Self::Dense(a) => a[(i, i)],
            Self::Toeplitz(t) => t.column()[0],
            Self::Kronecker(f) => {
                let mut rest = i;
                let mut acc = 1.0;
                for factor in f.iter().rev() {
                    let s = factor.size();
                    acc *= factor.diagonal_value(rest % s);
                    rest /= s;
                }
                acc
            }
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.size(), v.len())?;
        Ok(match self {
            Self::Dense(a) => dense_matvec(a, v),
            Self::Toeplitz(t) => t.matvec(v)?,
            Self::Kronecker(factors) => {
                let sizes: Vec<usize> = factors.iter().map(Self::size).collect();
                let mut x = v.to_vec();
                for (p, factor) in factors.iter().enumerate() {
                    x = match factor {
                        Self::Dense(a) => mode_multiply_dense(&x, &sizes, p, a, false),
                        other => mode_multiply_with(&x, &sizes, p, |fiber| {
                            other.matvec(fiber).expect("fiber length equals factor size")
                        }),
                    };
                }
                x
            }
        })
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let m = self.size();
        if m > DENSE_EXPORT_CAP {
            return Err(Error::InvalidArgument(format!(
                "refusing to expand a {m}×{m} matrix (cap {DENSE_EXPORT_CAP})"
            )));
        }
        Ok(self.to_dense_uncapped())
    }

    fn to_dense_uncapped(&self) -> DMatrix<f64> {
        match self {
            Self::Dense(a) => a.clone(),
            Self::Toeplitz(t) => t.to_dense(),
            Self::Kronecker(f) => {
                let mut acc = f[0].to_dense_uncapped();
                for factor in &f[1..] {
                    acc = acc.kronecker(&factor.to_dense_uncapped());
                }
                acc
            }
        }
    }

    /// Eigenvalues in nonincreasing order, without eigenvectors.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut vals = match self {
            Self::Dense(a) => {
                if max_asymmetry(a) > SYMMETRY_TOL * a.amax().max(1.0) {
                    return Err(Error::Structure("matrix is not symmetric".into()));
                }
                a.clone().symmetric_eigenvalues().as_slice().to_vec()
            }
            Self::Toeplitz(t) => t.to_dense().symmetric_eigenvalues().as_slice().to_vec(),
            Self::Kronecker(f) => {
                let per = f.iter().map(Self::eigenvalues).collect::<Result<Vec<_>>>()?;
                kron_values(&per)
            }
        };
        vals.sort_by(|a, b| b.total_cmp(a));
        Ok(vals)
    }

    pub fn eig(&self) -> Result<EigenSystem> {
        let mut bases = Vec::new();
        let mut per = Vec::new();
        self.collect_factor_eigs(&mut bases, &mut per)?;
        let raw = kron_values(&per);
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| raw[b].total_cmp(&raw[a]));
        let values = order.iter().map(|&i| raw[i]).collect();
        Ok(EigenSystem { values, bases, order })
    }

    fn collect_factor_eigs(&self, bases: &mut Vec<DMatrix<f64>>, per: &mut Vec<Vec<f64>>) -> Result<()> {
        match self {
            Self::Kronecker(f) => {
                for factor in f {
                    factor.collect_factor_eigs(bases, per)?;
                }
            }
            Self::Dense(a) => {
                if max_asymmetry(a) > SYMMETRY_TOL * a.amax().max(1.0) {
                    return Err(Error::Structure("matrix is not symmetric".into()));
                }
                let e = a.clone().symmetric_eigen();
                per.push(e.eigenvalues.as_slice().to_vec());
                bases.push(e.eigenvectors);
            }
            Self::Toeplitz(t) => {
                let e = t.to_dense().symmetric_eigen();
                per.push(e.eigenvalues.as_slice().to_vec());
                bases.push(e.eigenvectors);
            }
        }
        Ok(())
    }
}

fn dense_matvec(a: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut out = vec![0.0; n];
    for (j, &vj) in v.iter().enumerate() {
        if vj != 0.0 {
            for (o, &aij) in out.iter_mut().zip(a.column(j).iter()) {
                *o += aij * vj;
            }
        }
    }
    out
}

/// All products of per-factor values in Kronecker order.
fn kron_values(per: &[Vec<f64>]) -> Vec<f64> {
    let mut acc = vec![1.0];
    for vals in per {
        let mut next = Vec::with_capacity(acc.len() * vals.len());
        for &a in &acc {
            for &b in vals {
                next.push(a * b);
            }
        }
        acc = next;
    }
    acc
}

/// Applies a dense factor along mode `p` of the tensor `x` with shape
/// `sizes` (last mode fastest).
pub(crate) fn mode_multiply_dense(x: &[f64], sizes: &[usize], p: usize, a: &DMatrix<f64>, transpose: bool) -> Vec<f64> {
    let n = sizes[p];
    let left: usize = sizes[..p].iter().product();
    let right: usize = sizes[p + 1..].iter().product();
    let mut y = vec![0.0; x.len()];
    for l in 0..left {
        let base = l * n * right;
        for i in 0..n {
            let yi = &mut y[base + i * right..base + (i + 1) * right];
            for j in 0..n {
                let aij = if transpose { a[(j, i)] } else { a[(i, j)] };
                if aij == 0.0 {
                    continue;
                }
                let xj = &x[base + j * right..base + (j + 1) * right];
                for (yv, &xv) in yi.iter_mut().zip(xj) {
                    *yv += aij * xv;
                }
            }
        }
    }
    y
}

fn mode_multiply_with(x: &[f64], sizes: &[usize], p: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Vec<f64> {
    let n = sizes[p];
    let left: usize = sizes[..p].iter().product();
    let right: usize = sizes[p + 1..].iter().product();
    let mut y = vec![0.0; x.len()];
    let mut fiber = vec![0.0; n];
    for l in 0..left {
        let base = l * n * right;
        for r in 0..right {
            for (j, fj) in fiber.iter_mut().enumerate() {
                *fj = x[base + j * right + r];
            }
            let out = f(&fiber);
            for (i, &o) in out.iter().enumerate() {
                y[base + i * right + r] = o;
            }
        }
    }
    y
}

/// `(A_1 ⊗ … ⊗ A_P) v` (or its transpose) for dense square factors,
/// never forming the product.
pub fn kron_matvec(factors: &[DMatrix<f64>], v: &[f64], transpose: bool) -> Result<Vec<f64>> {
    let sizes: Vec<usize> = factors.iter().map(|a| a.nrows()).collect();
    check_len(sizes.iter().product(), v.len())?;
    let mut x = v.to_vec();
    for (p, a) in factors.iter().enumerate() {
        x = mode_multiply_dense(&x, &sizes, p, a, transpose);
    }
    Ok(x)
}

/// `Q V Qᵀ` with `Q` kept as per-factor orthogonal matrices.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    values: Vec<f64>,
    bases: Vec<DMatrix<f64>>,
    /// `order[k]` is the Kronecker index of the k-th largest eigenvalue.
    order: Vec<usize>,
}

impl EigenSystem {
    /// Eigenvalues, nonincreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvalues clamped at zero and the number that were negative.
    pub fn clamped_eigenvalues(&self) -> (Vec<f64>, usize) {
        clamp_nonnegative(&self.values)
    }

    /// `Qᵀ v`, coordinates ordered like `eigenvalues()`.
    pub fn multiply_qt(&self, v: &[f64]) -> Result<Vec<f64>> {
        let y = kron_matvec(&self.bases, v, true)?;
        Ok(self.order.iter().map(|&i| y[i]).collect())
    }

    /// `Q c` for coordinates ordered like `eigenvalues()`.
    pub fn multiply_q(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_len(self.values.len(), c.len())?;
        let mut y = vec![0.0; c.len()];
        for (&i, &ci) in self.order.iter().zip(c) {
            y[i] = ci;
        }
        kron_matvec(&self.bases, &y, false)
    }
}

pub fn clamp_nonnegative(values: &[f64]) -> (Vec<f64>, usize) {
    let mut clamped = 0;
    let v = values
        .iter()
        .map(|&l| {
            if l < 0.0 {
                clamped += 1;
                0.0
            } else {
                l
            }
        })
        .collect();
    (v, clamped)
}
