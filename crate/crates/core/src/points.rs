use crate::error::{Error, Result};

/// Row-major collection of `len` points in `dim` dimensions.
#[derive(Clone, Debug, PartialEq)]
pub struct Points {
    data: Vec<f64>,
    dim: usize,
}

impl Points {
    pub fn new(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("point dimension must be positive".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values do not split into rows of length {dim}",
                data.len()
            )));
        }
        Ok(Self { data, dim })
    }

    pub fn from_1d(values: Vec<f64>) -> Self {
        Self { data: values, dim: 1 }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Dimension { expected: dim, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        Self::new(data, dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, p: usize) -> Vec<f64> {
        self.iter().map(|r| r[p]).collect()
    }

    /// Per-dimension (min, max). Empty sets yield infinite bounds.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); self.dim];
        for r in self.iter() {
            for (bp, &v) in b.iter_mut().zip(r) {
                bp.0 = bp.0.min(v);
                bp.1 = bp.1.max(v);
            }
        }
        b
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self { data, dim: self.dim }
    }
}
