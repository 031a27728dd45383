//! Stationary covariance functions.
//!
//! Every kernel keeps its hyperparameters as one flat vector. Positive
//! quantities (length-scales, signal variances, mixture weights and spectral
//! variances) are stored as natural logarithms so that an optimizer can move
//! freely over the whole real line. Spectral-mixture means are stored as-is:
//! the mixture is even in each mean, so they carry no sign constraint.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::points::Points;

/// Kernel hyperparameters in optimizer space.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypers(Vec<f64>);

impl Hypers {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        Self(raw)
    }

    pub fn raw(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// Isotropic squared exponential, `s² exp(-|τ|²/(2ℓ²))`.
    /// Layout: `[ln ℓ, ln s²]`.
    Rbf,
    /// One-dimensional spectral mixture,
    /// `Σ_q w_q exp(-2π²τ²v_q) cos(2πτμ_q)`.
    /// Layout: `[ln w_1..ln w_Q, μ_1..μ_Q, ln v_1..ln v_Q]`.
    SpectralMixture { components: usize },
    /// Product of one-dimensional factors, factor `p` acting on input
    /// coordinate `p`. Hyperparameters are the factors' vectors concatenated.
    Product(Vec<Family>),
}

impl Family {
    pub fn arity(&self) -> usize {
        match self {
            Family::Rbf => 2,
            Family::SpectralMixture { components } => 3 * components,
            Family::Product(factors) => factors.iter().map(Family::arity).sum(),
        }
    }

    fn names(&self, prefix: &str, out: &mut Vec<String>) {
        match self {
            Family::Rbf => {
                out.push(format!("{prefix}log_lengthscale"));
                out.push(format!("{prefix}log_signal_variance"));
            }
            Family::SpectralMixture { components } => {
                for q in 0..*components {
                    out.push(format!("{prefix}log_weight.{q}"));
                }
                for q in 0..*components {
                    out.push(format!("{prefix}mean.{q}"));
                }
                for q in 0..*components {
                    out.push(format!("{prefix}log_variance.{q}"));
                }
            }
            Family::Product(factors) => {
                for (p, f) in factors.iter().enumerate() {
                    f.names(&format!("{prefix}k{p}."), out);
                }
            }
        }
    }

    /// Short textual tag, e.g. `rbf`, `sm3`, `product(sm5,rbf)`.
    pub fn tag(&self) -> String {
        match self {
            Family::Rbf => "rbf".into(),
            Family::SpectralMixture { components } => format!("sm{components}"),
            Family::Product(f) => {
                let inner: Vec<String> = f.iter().map(Family::tag).collect();
                format!("product({})", inner.join(","))
            }
        }
    }

    pub fn parse_tag(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "rbf" {
            return Ok(Family::Rbf);
        }
        if let Some(q) = s.strip_prefix("sm") {
            let components: usize = q.parse().map_err(|_| Error::Config(format!("bad spectral mixture tag `{s}`")))?;
            if components == 0 {
                return Err(Error::Config("spectral mixture needs at least one component".into()));
            }
            return Ok(Family::SpectralMixture { components });
        }
        if let Some(inner) = s.strip_prefix("product(").and_then(|r| r.strip_suffix(')')) {
            let factors = inner.split(',').map(Family::parse_tag).collect::<Result<Vec<_>>>()?;
            return Ok(Family::Product(factors));
        }
        Err(Error::Config(format!("unknown kernel family `{s}`")))
    }
}

/// A stationary covariance function with its hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    family: Family,
    hypers: Hypers,
    input_dim: usize,
}

impl Kernel {
    pub fn new(family: Family, hypers: Hypers, input_dim: usize) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::InvalidArgument("input dimension must be positive".into()));
        }
        match &family {
            Family::SpectralMixture { .. } if input_dim != 1 => {
                return Err(Error::InvalidArgument(
                    "spectral mixture kernels are one-dimensional; use a product for D > 1".into(),
                ))
            }
            Family::Product(factors) => {
                if factors.len() != input_dim {
                    return Err(Error::InvalidArgument(format!(
                        "product kernel has {} factors for {input_dim} input dimensions",
                        factors.len()
                    )));
                }
                if factors.iter().any(|f| matches!(f, Family::Product(_))) {
                    return Err(Error::InvalidArgument("product factors must be one-dimensional".into()));
                }
            }
            _ => {}
        }
        check_len(family.arity(), hypers.len())?;
        if hypers.raw().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("hyperparameters must be finite".into()));
        }
        Ok(Self { family, hypers, input_dim })
    }

    /// RBF kernel from natural-scale length-scale and signal variance.
    pub fn rbf(input_dim: usize, lengthscale: f64, signal_variance: f64) -> Result<Self> {
        positive("lengthscale", lengthscale)?;
        positive("signal variance", signal_variance)?;
        Self::new(Family::Rbf, Hypers::from_raw(vec![lengthscale.ln(), signal_variance.ln()]), input_dim)
    }

    /// One-dimensional spectral mixture from natural-scale parameters.
    pub fn spectral_mixture(weights: &[f64], means: &[f64], variances: &[f64]) -> Result<Self> {
        let q = weights.len();
        if q == 0 || means.len() != q || variances.len() != q {
            return Err(Error::InvalidArgument(
                "spectral mixture needs equally many weights, means and variances".into(),
            ));
        }
        let mut raw = Vec::with_capacity(3 * q);
        for &w in weights {
            positive("mixture weight", w)?;
            raw.push(w.ln());
        }
        raw.extend_from_slice(means);
        for &v in variances {
            positive("spectral variance", v)?;
            raw.push(v.ln());
        }
        Self::new(Family::SpectralMixture { components: q }, Hypers::from_raw(raw), 1)
    }

    /// Product over input coordinates of one-dimensional kernels.
    pub fn product(factors: Vec<Kernel>) -> Result<Self> {
        let mut families = Vec::with_capacity(factors.len());
        let mut raw = Vec::new();
        for f in &factors {
            if f.input_dim != 1 {
                return Err(Error::InvalidArgument("product factors must be one-dimensional".into()));
            }
            families.push(f.family.clone());
            raw.extend_from_slice(f.hypers.raw());
        }
        let d = factors.len();
        Self::new(Family::Product(families), Hypers::from_raw(raw), d)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn hypers(&self) -> &Hypers {
        &self.hypers
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn with_hypers(&self, hypers: Hypers) -> Result<Self> {
        Self::new(self.family.clone(), hypers, self.input_dim)
    }

    pub fn hyper_names(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.hypers.len());
        self.family.names("", &mut out);
        out
    }

    pub fn named_hypers(&self) -> Vec<(String, f64)> {
        self.hyper_names().into_iter().zip(self.hypers.raw().iter().copied()).collect()
    }

    /// Rebuilds a kernel from `(name, value)` pairs. Every name must be
    /// present exactly once; unknown names are rejected.
    pub fn from_named(family: Family, input_dim: usize, pairs: &[(String, f64)]) -> Result<Self> {
        let mut names = Vec::new();
        family.names("", &mut names);
        let mut raw = vec![f64::NAN; names.len()];
        for (name, value) in pairs {
            let i = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Config(format!("unknown hyperparameter `{name}`")))?;
            raw[i] = *value;
        }
        if let Some(i) = raw.iter().position(|v| v.is_nan()) {
            return Err(Error::Config(format!("missing hyperparameter `{}`", names[i])));
        }
        Self::new(family, Hypers::from_raw(raw), input_dim)
    }

    /// Covariance as a function of the lag `τ = x − z`.
    pub fn eval_lag(&self, tau: &[f64]) -> f64 {
        let h = self.hypers.raw();
        match &self.family {
            Family::Rbf => {
                let r2: f64 = tau.iter().map(|t| t * t).sum();
                rbf_value(h, r2)
            }
            Family::SpectralMixture { components } => sm_value(*components, h, tau[0]),
            Family::Product(factors) => {
                let mut offset = 0;
                let mut acc = 1.0;
                for (f, &t) in factors.iter().zip(tau) {
                    let a = f.arity();
                    acc *= eval_1d(f, &h[offset..offset + a], t);
                    offset += a;
                }
                acc
            }
        }
    }

    pub fn eval(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        check_len(self.input_dim, x.len())?;
        check_len(self.input_dim, z.len())?;
        Ok(self.eval_unchecked(x, z))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64], z: &[f64]) -> f64 {
        let h = self.hypers.raw();
        match &self.family {
            Family::Rbf => {
                let r2: f64 = x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum();
                rbf_value(h, r2)
            }
            Family::SpectralMixture { components } => sm_value(*components, h, x[0] - z[0]),
            Family::Product(factors) => {
                let mut offset = 0;
                let mut acc = 1.0;
                for (p, f) in factors.iter().enumerate() {
                    let a = f.arity();
                    acc *= eval_1d(f, &h[offset..offset + a], x[p] - z[p]);
                    offset += a;
                }
                acc
            }
        }
    }

    /// Prior variance `k(x, x)`.
    pub fn variance(&self) -> f64 {
        self.eval_lag(&vec![0.0; self.input_dim])
    }

    pub fn eval_matrix(&self, x1: &Points, x2: &Points) -> Result<DMatrix<f64>> {
        check_len(self.input_dim, x1.dim())?;
        check_len(self.input_dim, x2.dim())?;
        let (n1, n2) = (x1.len(), x2.len());
        let h = self.hypers.raw();
        let factors: Vec<Prepared> = match &self.family {
            Family::Product(fs) => {
                let mut offset = 0;
                fs.iter()
                    .map(|f| {
                        let a = f.arity();
                        offset += a;
                        Prepared::new(f, &h[offset - a..offset])
                    })
                    .collect()
            }
            Family::SpectralMixture { .. } => vec![Prepared::new(&self.family, h)],
            Family::Rbf => Vec::new(),
        };
        let row = |i: usize| -> Vec<f64> {
            let xi = x1.row(i);
            if factors.is_empty() {
                return x2.iter().map(|zj| self.eval_unchecked(xi, zj)).collect();
            }
            x2.iter()
                .map(|zj| factors.iter().enumerate().fold(1.0, |acc, (p, f)| acc * f.value(xi[p] - zj[p])))
                .collect()
        };
        #[cfg(feature = "parallel")]
        let rows: Vec<Vec<f64>> = {
            use rayon::prelude::*;
            (0..n1).into_par_iter().map(row).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let rows: Vec<Vec<f64>> = (0..n1).map(row).collect();
        Ok(DMatrix::from_fn(n1, n2, |i, j| rows[i][j]))
    }

    /// One-dimensional kernels whose product over coordinates equals this
    /// kernel, if it separates that way.
    pub fn axis_factors(&self) -> Option<Vec<Kernel>> {
        let h = self.hypers.raw();
        match &self.family {
            Family::Rbf => Some(
                (0..self.input_dim)
                    .map(|p| {
                        let log_s2 = if p == 0 { h[1] } else { 0.0 };
                        Kernel { family: Family::Rbf, hypers: Hypers(vec![h[0], log_s2]), input_dim: 1 }
                    })
                    .collect(),
            ),
            Family::SpectralMixture { .. } => Some(vec![self.clone()]),
            Family::Product(factors) => {
                let mut offset = 0;
                Some(
                    factors
                        .iter()
                        .map(|f| {
                            let a = f.arity();
                            let k = Kernel {
                                family: f.clone(),
                                hypers: Hypers(h[offset..offset + a].to_vec()),
                                input_dim: 1,
                            };
                            offset += a;
                            k
                        })
                        .collect(),
                )
            }
        }
    }
}

fn positive(what: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} must be positive and finite, got {v}")))
    }
}

fn rbf_value(h: &[f64], r2: f64) -> f64 {
    h[1].exp() * (-0.5 / (2.0 * h[0]).exp() * r2).exp()
}

fn sm_value(q: usize, h: &[f64], tau: f64) -> f64 {
    SmTerms::new(q, h).value(tau)
}

/// Decoded spectral-mixture coefficients: `Σ w exp(a τ²) cos(b τ)`.
struct SmTerms {
    w: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl SmTerms {
    fn new(q: usize, h: &[f64]) -> Self {
        Self {
            w: h[..q].iter().map(|v| v.exp()).collect(),
            a: h[2 * q..3 * q].iter().map(|v| -2.0 * PI * PI * v.exp()).collect(),
            b: h[q..2 * q].iter().map(|mu| 2.0 * PI * mu).collect(),
        }
    }

    fn value(&self, tau: f64) -> f64 {
        // |τ| keeps k(x,z) and k(z,x) on one code path.
        let t = tau.abs();
        let t2 = t * t;
        let mut acc = 0.0;
        for c in 0..self.w.len() {
            acc += self.w[c] * (self.a[c] * t2).exp() * (self.b[c] * t).cos();
        }
        acc
    }
}

/// One-dimensional factor with hyperparameters decoded once.
enum Prepared {
    Rbf { s2: f64, scale: f64 },
    Sm(SmTerms),
}

impl Prepared {
    fn new(family: &Family, h: &[f64]) -> Self {
        match family {
            Family::Rbf => Prepared::Rbf { s2: h[1].exp(), scale: -0.5 / (2.0 * h[0]).exp() },
            Family::SpectralMixture { components } => Prepared::Sm(SmTerms::new(*components, h)),
            Family::Product(_) => unreachable!("nested products are rejected at construction"),
        }
    }

    fn value(&self, tau: f64) -> f64 {
        match self {
            Prepared::Rbf { s2, scale } => s2 * (scale * (tau * tau)).exp(),
            Prepared::Sm(t) => t.value(tau),
        }
    }
}

fn eval_1d(family: &Family, h: &[f64], tau: f64) -> f64 {
    match family {
        Family::Rbf => rbf_value(h, tau * tau),
        Family::SpectralMixture { components } => sm_value(*components, h, tau),
        Family::Product(_) => unreachable!("nested products are rejected at construction"),
    }
}

/// Relative spacing tolerance for treating an axis as equispaced.
pub const EQUISPACED_RTOL: f64 = 1e-9;

pub fn is_equispaced(axis: &[f64]) -> bool {
    if axis.len() < 3 {
        return true;
    }
    let h = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    axis.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= EQUISPACED_RTOL * h.abs())
}

/// First column of the symmetric Toeplitz matrix `K_{U,U}` for a stationary
/// one-dimensional kernel on an equispaced axis.
pub fn toeplitz_column(kernel: &Kernel, axis: &[f64]) -> Result<Vec<f64>> {
    if kernel.input_dim() != 1 {
        return Err(Error::Structure("Toeplitz structure needs a one-dimensional kernel".into()));
    }
    if axis.is_empty() {
        return Err(Error::InvalidArgument("empty grid axis".into()));
    }
    if !is_equispaced(axis) {
        return Err(Error::Structure("grid axis is not equispaced".into()));
    }
    if axis.len() == 1 {
        return Ok(vec![kernel.eval_lag(&[0.0])]);
    }
    let h = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    Ok((0..axis.len()).map(|t| kernel.eval_lag(&[t as f64 * h])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rbf1() -> Kernel {
        Kernel::rbf(1, 1.0, 1.0).unwrap()
    }

    #[test]
    fn rbf_values() {
        let k = rbf1();
        assert_eq!(k.eval(&[0.3], &[0.3]).unwrap(), 1.0);
        assert!((k.eval(&[0.0], &[1.0]).unwrap() - (-0.5f64).exp()).abs() < 1e-15);
        assert!((k.eval(&[0.0], &[1.0]).unwrap() - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn sm_single_component_reduces_to_rbf() {
        let v = 1.0 / (4.0 * PI * PI);
        let k = Kernel::spectral_mixture(&[1.0], &[0.0], &[v]).unwrap();
        // exp(-2π² τ² v) with v = 1/(4π²) is exp(-τ²/2).
        let direct = (-0.5f64).exp();
        assert!((k.eval(&[0.0], &[1.0]).unwrap() - direct).abs() < 1e-14);
        assert!((k.eval(&[2.0], &[1.0]).unwrap() - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let k = Kernel::rbf(2, 1.0, 1.0).unwrap();
        assert!(matches!(k.eval(&[0.0], &[0.0, 1.0]), Err(Error::Dimension { .. })));
        assert!(Kernel::new(Family::Rbf, Hypers::from_raw(vec![0.0]), 1).is_err());
        assert!(Kernel::new(Family::SpectralMixture { components: 1 }, Hypers::from_raw(vec![0.0; 3]), 2).is_err());
    }

    #[test]
    fn eval_matrix_small_cases() {
        let k = rbf1();
        let x = Points::from_1d(vec![0.0]);
        assert_eq!(k.eval_matrix(&x, &x).unwrap()[(0, 0)], 1.0);
        let x = Points::from_1d(vec![0.0, 1.0]);
        let m = k.eval_matrix(&x, &x).unwrap();
        let e = (-0.5f64).exp();
        assert_eq!(m[(0, 0)], 1.0);
        assert_eq!(m[(1, 1)], 1.0);
        assert!((m[(0, 1)] - e).abs() < 1e-15 && (m[(1, 0)] - e).abs() < 1e-15);
    }

    #[test]
    fn eval_matrix_is_psd_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = Points::from_1d((0..50).map(|_| rng.random_range(-5.0..5.0)).collect());
        let k = Kernel::rbf(1, 1.3, 1.0).unwrap();
        let m = k.eval_matrix(&x, &x).unwrap();
        let eig = m.symmetric_eigenvalues();
        assert!(eig.min() >= -1e-10);
    }

    #[test]
    fn psd_spot_check_relative_to_max_eigenvalue() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = Points::new((0..400).map(|_| rng.random_range(-3.0..3.0)).collect(), 2).unwrap();
        let sm = Kernel::spectral_mixture(&[0.7, 0.3], &[0.0, 0.6], &[0.05, 0.02]).unwrap();
        let k = Kernel::product(vec![sm, Kernel::rbf(1, 0.8, 2.0).unwrap()]).unwrap();
        let m = k.eval_matrix(&x, &x).unwrap();
        let eig = m.symmetric_eigenvalues();
        assert!(eig.min() >= -1e-8 * eig.max());
    }

    #[test]
    fn symmetry_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sm = Kernel::spectral_mixture(&[0.5, 1.5], &[0.3, 1.1], &[0.2, 0.01]).unwrap();
        let prod = Kernel::product(vec![sm.clone(), rbf1()]).unwrap();
        let rbf2 = Kernel::rbf(2, 0.7, 3.0).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..2).map(|_| rng.random_range(-10.0..10.0)).collect();
            let z: Vec<f64> = (0..2).map(|_| rng.random_range(-10.0..10.0)).collect();
            assert_eq!(sm.eval(&x[..1], &z[..1]).unwrap().to_bits(), sm.eval(&z[..1], &x[..1]).unwrap().to_bits());
            assert_eq!(prod.eval(&x, &z).unwrap().to_bits(), prod.eval(&z, &x).unwrap().to_bits());
            assert_eq!(rbf2.eval(&x, &z).unwrap().to_bits(), rbf2.eval(&z, &x).unwrap().to_bits());
        }
    }

    #[test]
    fn stationarity_under_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sm = Kernel::spectral_mixture(&[0.5, 1.5], &[0.3, 1.1], &[0.2, 0.01]).unwrap();
        for _ in 0..200 {
            let x = rng.random_range(-5.0..5.0);
            let z = rng.random_range(-5.0..5.0);
            let s = rng.random_range(-1.0..1.0);
            let a = sm.eval(&[x], &[z]).unwrap();
            let b = sm.eval(&[x + s], &[z + s]).unwrap();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn product_equals_product_of_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f0 = Kernel::spectral_mixture(&[0.5, 1.5], &[0.3, 1.1], &[0.2, 0.01]).unwrap();
        let f1 = Kernel::rbf(1, 0.4, 2.0).unwrap();
        let prod = Kernel::product(vec![f0.clone(), f1.clone()]).unwrap();
        for _ in 0..200 {
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let z = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let expect = f0.eval(&x[..1], &z[..1]).unwrap() * f1.eval(&x[1..], &z[1..]).unwrap();
            assert!((prod.eval(&x, &z).unwrap() - expect).abs() <= 1e-14);
        }
    }

    #[test]
    fn axis_factors_reproduce_kernel() {
        let k = Kernel::rbf(3, 0.9, 2.5).unwrap();
        let f = k.axis_factors().unwrap();
        let x = [0.1, -0.4, 1.2];
        let z = [0.5, 0.3, -0.2];
        let prod: f64 = (0..3).map(|p| f[p].eval(&x[p..p + 1], &z[p..p + 1]).unwrap()).product();
        assert!((prod - k.eval(&x, &z).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn toeplitz_column_cases() {
        let k = rbf1();
        let c = toeplitz_column(&k, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(c[0], 1.0);
        assert!((c[1] - (-0.5f64).exp()).abs() < 1e-15);
        assert!((c[2] - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(toeplitz_column(&k, &[4.0]).unwrap(), vec![1.0]);
        assert!(matches!(toeplitz_column(&k, &[0.0, 1.0, 2.5]), Err(Error::Structure(_))));
    }

    #[test]
    fn toeplitz_column_reproduces_dense_matrix() {
        let k = Kernel::spectral_mixture(&[1.0, 0.4], &[0.2, 0.9], &[0.1, 0.03]).unwrap();
        let axis: Vec<f64> = (0..40).map(|i| -2.0 + 0.1 * i as f64).collect();
        let c = toeplitz_column(&k, &axis).unwrap();
        let dense = k.eval_matrix(&Points::from_1d(axis.clone()), &Points::from_1d(axis)).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                assert!((dense[(i, j)] - c[i.abs_diff(j)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn named_hypers_round_trip() {
        let f0 = Kernel::spectral_mixture(&[0.5, 1.5], &[0.3, 1.1], &[0.2, 0.01]).unwrap();
        let prod = Kernel::product(vec![f0, rbf1()]).unwrap();
        let pairs = prod.named_hypers();
        assert_eq!(pairs[0].0, "k0.log_weight.0");
        assert_eq!(pairs.last().unwrap().0, "k1.log_signal_variance");
        let back = Kernel::from_named(prod.family().clone(), 2, &pairs).unwrap();
        assert_eq!(back, prod);
        assert!(Kernel::from_named(prod.family().clone(), 2, &pairs[1..]).is_err());
        let tag = prod.family().tag();
        assert_eq!(Family::parse_tag(&tag).unwrap(), *prod.family());
    }
}
