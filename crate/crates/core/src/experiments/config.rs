//! Flat `key = value` experiment configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Reconstruct,
    KernelLearn,
    Infill,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Reconstruct => "reconstruct",
            Experiment::KernelLearn => "kernel-learn",
            Experiment::Infill => "infill",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "reconstruct" => Ok(Experiment::Reconstruct),
            "kernel-learn" => Ok(Experiment::KernelLearn),
            "infill" => Ok(Experiment::Infill),
            other => Err(Error::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

/// Interpolation strategy choices exposed on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeChoice {
    Linear,
    Cubic,
    Idw,
    GlobalGp,
}

impl SchemeChoice {
    pub const ALL: [SchemeChoice; 4] =
        [SchemeChoice::Linear, SchemeChoice::Cubic, SchemeChoice::Idw, SchemeChoice::GlobalGp];

    pub fn name(self) -> &'static str {
        match self {
            SchemeChoice::Linear => "linear",
            SchemeChoice::Cubic => "cubic",
            SchemeChoice::Idw => "idw",
            SchemeChoice::GlobalGp => "globalgp",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}` (expected linear, cubic, idw or globalgp)")))
    }
}

/// Inference methods that can be toggled per run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Exact,
    Sor,
    Fitc,
    Ski,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Sor => "sor",
            Method::Fitc => "fitc",
            Method::Ski => "ski",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        [Method::Exact, Method::Sor, Method::Fitc, Method::Ski]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// One spectral-mixture component `(weight, mean, variance)`.
pub type SmComponent = (f64, f64, f64);

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub trace: bool,
    pub n: Option<usize>,
    pub input_std: Option<f64>,
    pub lengthscale: Option<f64>,
    pub signal_variance: Option<f64>,
    pub noise_variance: Option<f64>,
    pub m_sweep: Option<Vec<usize>>,
    pub schemes: Option<Vec<SchemeChoice>>,
    pub methods: Option<Vec<Method>>,
    pub fitc_m_sweep: Option<Vec<usize>>,
    pub components: Option<usize>,
    pub opt_iters: Option<usize>,
    pub opt_evals: Option<usize>,
    pub tau_max: Option<f64>,
    pub data: Option<PathBuf>,
    pub gaps: Option<Vec<(f64, f64)>>,
    pub learn_subset: Option<usize>,
    pub learn: Option<bool>,
    /// Noise variance of the built-in synthetic signal.
    pub signal_noise: Option<f64>,
    pub true_dim0: Option<Vec<SmComponent>>,
    pub true_dim1: Option<Vec<SmComponent>>,
}

pub const KEYS: &[&str] = &[
    "experiment",
    "seed",
    "out",
    "trace",
    "n",
    "input_std",
    "lengthscale",
    "signal_variance",
    "noise_variance",
    "m_sweep",
    "schemes",
    "methods",
    "fitc_m_sweep",
    "components",
    "opt_iters",
    "opt_evals",
    "tau_max",
    "data",
    "gaps",
    "learn_subset",
    "learn",
    "signal_noise",
    "true_dim0",
    "true_dim1",
];

fn list<T>(s: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let out = s.split(',').map(|p| item(p.trim())).collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        return Err(Error::Config("empty list".into()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Config(format!("`{s}` is not a valid number")))
}

fn positive(s: &str) -> Result<f64> {
    let v: f64 = num(s)?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("`{s}` must be positive")))
    }
}

fn nonnegative(s: &str) -> Result<f64> {
    let v: f64 = num(s)?;
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("`{s}` must be nonnegative")))
    }
}

fn count(s: &str) -> Result<usize> {
    let v: usize = num(s)?;
    if v == 0 {
        return Err(Error::Config("counts must be positive".into()));
    }
    Ok(v)
}

fn boolean(s: &str) -> Result<bool> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!("`{s}` is not true or false"))),
    }
}

fn interval(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(':').ok_or_else(|| Error::Config(format!("gap `{s}` is not of the form lo:hi")))?;
    let (a, b): (f64, f64) = (num(a.trim())?, num(b.trim())?);
    if !(a < b) {
        return Err(Error::Config(format!("gap `{s}` is empty")));
    }
    Ok((a, b))
}

fn component(s: &str) -> Result<SmComponent> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [w, mu, v] = parts[..] else {
        return Err(Error::Config(format!("component `{s}` is not of the form weight:mean:variance")));
    };
    Ok((positive(w)?, num(mu)?, positive(v)?))
}

fn join<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    /// Parses the config grammar: one `key = value` per line, `#` starts a
    /// comment, lists are comma separated. Unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(Error::Parse { line: line_no, column: 1, message: "expected `key = value`".into() });
            };
            let key = line[..eq].trim();
            let value = line[eq + 1..].trim();
            let value_col = eq + 2 + (line[eq + 1..].len() - line[eq + 1..].trim_start().len());
            if !KEYS.contains(&key) {
                let col = line.len() - line.trim_start().len() + 1;
                return Err(Error::Parse { line: line_no, column: col, message: format!("unknown key `{key}`") });
            }
            if seen.contains(&key) {
                return Err(Error::Parse { line: line_no, column: 1, message: format!("duplicate key `{key}`") });
            }
            seen.push(key);
            cfg.set(key, value).map_err(|e| Error::Parse {
                line: line_no,
                column: value_col,
                message: match e {
                    Error::Config(m) => m,
                    other => other.to_string(),
                },
            })?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "experiment" => self.experiment = Some(Experiment::parse(value)?),
            "seed" => self.seed = num(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "trace" => self.trace = boolean(value)?,
            "n" => self.n = Some(count(value)?),
            "input_std" => self.input_std = Some(positive(value)?),
            "lengthscale" => self.lengthscale = Some(positive(value)?),
            "signal_variance" => self.signal_variance = Some(positive(value)?),
            "noise_variance" => self.noise_variance = Some(positive(value)?),
            "m_sweep" => self.m_sweep = Some(list(value, count)?),
            "schemes" => self.schemes = Some(list(value, SchemeChoice::parse)?),
            "methods" => self.methods = Some(list(value, Method::parse)?),
            "fitc_m_sweep" => self.fitc_m_sweep = Some(list(value, count)?),
            "components" => self.components = Some(count(value)?),
            "opt_iters" => self.opt_iters = Some(count(value)?),
            "opt_evals" => self.opt_evals = Some(count(value)?),
            "tau_max" => self.tau_max = Some(positive(value)?),
            "data" => self.data = Some(PathBuf::from(value)),
            "gaps" => self.gaps = Some(list(value, interval)?),
            "learn_subset" => self.learn_subset = Some(count(value)?),
            "learn" => self.learn = Some(boolean(value)?),
            "signal_noise" => self.signal_noise = Some(nonnegative(value)?),
            "true_dim0" => self.true_dim0 = Some(list(value, component)?),
            "true_dim1" => self.true_dim1 = Some(list(value, component)?),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Canonical text form; `parse(to_text())` gives back the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(e) = self.experiment {
            put("experiment", e.name().into());
        }
        put("seed", self.seed.to_string());
        if let Some(p) = &self.out {
            put("out", p.display().to_string());
        }
        put("trace", self.trace.to_string());
        let f = |x: &f64| format!("{x:?}");
        if let Some(v) = self.n {
            put("n", v.to_string());
        }
        for (k, v) in [
            ("input_std", self.input_std),
            ("lengthscale", self.lengthscale),
            ("signal_variance", self.signal_variance),
            ("noise_variance", self.noise_variance),
        ] {
            if let Some(v) = v {
                put(k, f(&v));
            }
        }
        if let Some(v) = &self.m_sweep {
            put("m_sweep", join(v, |m| m.to_string()));
        }
        if let Some(v) = &self.schemes {
            put("schemes", join(v, |c| c.name().to_string()));
        }
        if let Some(v) = &self.methods {
            put("methods", join(v, |c| c.name().to_string()));
        }
        if let Some(v) = &self.fitc_m_sweep {
            put("fitc_m_sweep", join(v, |m| m.to_string()));
        }
        for (k, v) in [("components", self.components), ("opt_iters", self.opt_iters), ("opt_evals", self.opt_evals)] {
            if let Some(v) = v {
                put(k, v.to_string());
            }
        }
        if let Some(v) = self.tau_max {
            put("tau_max", f(&v));
        }
        if let Some(p) = &self.data {
            put("data", p.display().to_string());
        }
        if let Some(v) = &self.gaps {
            put("gaps", join(v, |(a, b)| format!("{a:?}:{b:?}")));
        }
        if let Some(v) = self.learn_subset {
            put("learn_subset", v.to_string());
        }
        if let Some(v) = self.learn {
            put("learn", v.to_string());
        }
        if let Some(v) = self.signal_noise {
            put("signal_noise", f(&v));
        }
        for (k, v) in [("true_dim0", &self.true_dim0), ("true_dim1", &self.true_dim1)] {
            if let Some(v) = v {
                put(k, join(v, |(w, m, var)| format!("{w:?}:{m:?}:{var:?}")));
            }
        }
        s
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}
