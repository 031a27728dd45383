use std::fmt;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;
use realfft::num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{check_len, Error, Result};

/// Symmetric Toeplitz matrix `T_ij = c[|i − j|]` with an FFT matvec through
/// a circulant embedding of size `N`, the first power of two `≥ 2m − 1`.
pub struct SymmetricToeplitz {
    column: Vec<f64>,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    /// Eigenvalues of the embedding circulant (real, since it is symmetric),
    /// for frequencies `0..=N/2`, pre-divided by `N`.
    spectrum: Vec<f64>,
    /// Buffers kept between matvecs. Fresh multi-megabyte allocations page
    /// fault on every call and dominate the FFT time at large `m`.
    workspace: Mutex<Option<Workspace>>,
}

struct Workspace {
    real: Vec<f64>,
    freq: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Clone for SymmetricToeplitz {
    fn clone(&self) -> Self {
        Self {
            column: self.column.clone(),
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            spectrum: self.spectrum.clone(),
            workspace: Mutex::new(None),
        }
    }
}

impl fmt::Debug for SymmetricToeplitz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymmetricToeplitz")
            .field("size", &self.column.len())
            .field("embedding", &self.embedding_size())
            .finish()
    }
}

impl SymmetricToeplitz {
    pub fn new(column: Vec<f64>) -> Result<Self> {
        if column.is_empty() {
            return Err(Error::InvalidArgument("empty Toeplitz column".into()));
        }
        if column.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("Toeplitz column must be finite".into()));
        }
        let m = column.len();
        let n = (2 * m - 1).next_power_of_two().max(2);
        let mut planner = RealFftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let mut embed = vec![0.0; n];
        embed[0] = column[0];
        for t in 1..m {
            embed[t] = column[t];
            embed[n - t] = column[t];
        }
        let mut freq = forward.make_output_vec();
        forward.process(&mut embed, &mut freq).expect("buffer sizes match the plan");
        let scale = 1.0 / n as f64;
        let spectrum = freq.iter().map(|z| z.re * scale).collect();
        Ok(Self { column, forward, inverse, spectrum, workspace: Mutex::new(None) })
    }

    pub fn size(&self) -> usize {
        self.column.len()
    }

    pub fn column(&self) -> &[f64] {
        &self.column
    }

    pub fn embedding_size(&self) -> usize {
        self.forward.len()
    }

    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.size()];
        self.matvec_into(v, &mut out)?;
        Ok(out)
    }

    pub fn matvec_into(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let m = self.size();
        check_len(m, v.len())?;
        check_len(m, out.len())?;
        if m == 1 {
            out[0] = self.column[0] * v[0];
            return Ok(());
        }
        // A concurrent caller gets its own buffers rather than waiting.
        let mut slot = self.workspace.try_lock().ok();
        let mut ws = slot.as_mut().and_then(|g| g.take()).unwrap_or_else(|| self.new_workspace());
        ws.real[..m].copy_from_slice(v);
        ws.real[m..].fill(0.0);
        self.forward
            .process_with_scratch(&mut ws.real, &mut ws.freq, &mut ws.scratch)
            .expect("buffer sizes match the plan");
        for (z, &s) in ws.freq.iter_mut().zip(&self.spectrum) {
            *z *= s;
        }
        // The product is Hermitian, but round-off leaves tiny imaginary
        // parts at DC and Nyquist that the inverse rejects.
        ws.freq[0].im = 0.0;
        if let Some(last) = ws.freq.last_mut() {
            last.im = 0.0;
        }
        self.inverse
            .process_with_scratch(&mut ws.freq, &mut ws.real, &mut ws.scratch)
            .expect("buffer sizes match the plan");
        out.copy_from_slice(&ws.real[..m]);
        if let Some(g) = slot.as_mut() {
            **g = Some(ws);
        }
        Ok(())
    }

    fn new_workspace(&self) -> Workspace {
        let len = self.forward.get_scratch_len().max(self.inverse.get_scratch_len());
        Workspace {
            real: self.forward.make_input_vec(),
            freq: self.forward.make_output_vec(),
            scratch: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.size();
        DMatrix::from_fn(m, m, |i, j| self.column[i.abs_diff(j)])
    }
}
