use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::interp::SparseWeights;
use crate::structla::StructuredKuu;

/// `K_SKI + σ² I = W K_{U,U} Wᵀ + σ² I` applied without forming any `n × n`
/// matrix.
#[derive(Clone, Debug)]
pub struct SkiOperator {
    w: SparseWeights,
    kuu: StructuredKuu,
    sigma2: f64,
}

/// Largest `n` for which `to_dense` will expand the operator.
pub const DENSE_SKI_CAP: usize = 5000;

impl SkiOperator {
    pub fn new(w: SparseWeights, kuu: StructuredKuu, sigma2: f64) -> Result<Self> {
        check_len(kuu.size(), w.n_cols())?;
        if !(sigma2 >= 0.0) {
            return Err(Error::InvalidArgument("noise variance must be nonnegative".into()));
        }
        Ok(Self { w, kuu, sigma2 })
    }

    pub fn weights(&self) -> &SparseWeights {
        &self.w
    }

    pub fn kuu(&self) -> &StructuredKuu {
        &self.kuu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn n(&self) -> usize {
        self.w.n_rows()
    }

    /// `K_SKI v`, without the noise term.
    pub fn kernel_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let u = self.w.spmv_t(v)?;
        let ku = self.kuu.matvec(&u)?;
        self.w.spmv(&ku)
    }

    /// `(K_SKI + σ² I) v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.kernel_apply(v)?;
        for (o, &x) in out.iter_mut().zip(v) {
            *o += self.sigma2 * x;
        }
        Ok(out)
    }

    pub(crate) fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let y = self.apply(v).expect("CG vectors have operator size");
        out.copy_from_slice(&y);
    }

    /// Dense `K_SKI` (without noise), for oracles and small problems.
    pub fn kernel_dense(&self) -> Result<DMatrix<f64>> {
        if self.n() > DENSE_SKI_CAP {
            return Err(Error::InvalidArgument(format!("n = {} exceeds the dense cap {DENSE_SKI_CAP}", self.n())));
        }
        if let StructuredKuu::Dense(k) = &self.kuu {
            return Ok(ski_dense(&self.w, &self.w, k));
        }
        // One structured matvec per input keeps memory at O(n² + m).
        let (n, m) = (self.n(), self.kuu.size());
        let mut out = DMatrix::zeros(n, n);
        let mut e = vec![0.0; m];
        for j in 0..n {
            let (idx, w) = self.w.row(j);
            for (&c, &wc) in idx.iter().zip(w) {
                e[c] += wc;
            }
            let col = self.w.spmv(&self.kuu.matvec(&e)?)?;
            out.column_mut(j).copy_from_slice(&col);
            for &c in idx {
                e[c] = 0.0;
            }
        }
        Ok(out)
    }
}

/// `W_a K W_bᵀ` as a dense matrix, exploiting the row sparsity of both.
pub fn ski_dense(wa: &SparseWeights, wb: &SparseWeights, kuu: &DMatrix<f64>) -> DMatrix<f64> {
    let (na, nb) = (wa.n_rows(), wb.n_rows());
    let m = kuu.nrows();
    // B = W_a K, one dense row per input.
    let mut b = vec![0.0; na * m];
    for i in 0..na {
        let (idx, w) = wa.row(i);
        let bi = &mut b[i * m..(i + 1) * m];
        for (&c, &wc) in idx.iter().zip(w) {
            if wc == 0.0 {
                continue;
            }
            for (bv, &k) in bi.iter_mut().zip(kuu.column(c).iter()) {
                *bv += wc * k;
            }
        }
    }
    let mut out = DMatrix::zeros(na, nb);
    for j in 0..nb {
        let (idx, w) = wb.row(j);
        for i in 0..na {
            let bi = &b[i * m..(i + 1) * m];
            out[(i, j)] = idx.iter().zip(w).map(|(&c, &wc)| wc * bi[c]).sum();
        }
    }
    out
}
