//! Versioned text manifest describing the models behind a run.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::kernels::{Family, Kernel};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ModelEntry {
    pub label: String,
    /// Free-form description of the approximation, e.g. `ski grid=512 interp=cubic`.
    pub scheme: String,
    pub kernel: Kernel,
    pub noise_variance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub version: u32,
    pub library_version: String,
    pub experiment: String,
    pub seed: u64,
    pub config_sha256: String,
    pub models: Vec<ModelEntry>,
}

impl Manifest {
    pub fn new(experiment: &str, seed: u64, config_sha256: String, models: Vec<ModelEntry>) -> Self {
        Self {
            version: MANIFEST_VERSION,
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            experiment: experiment.to_string(),
            seed,
            config_sha256,
            models,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "skigp-manifest = {}", self.version);
        let _ = writeln!(s, "library_version = {}", self.library_version);
        let _ = writeln!(s, "experiment = {}", self.experiment);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "config_sha256 = {}", self.config_sha256);
        for m in &self.models {
            let _ = writeln!(s, "\n[model {}]", m.label);
            let _ = writeln!(s, "scheme = {}", m.scheme);
            let _ = writeln!(s, "family = {}", m.kernel.family().tag());
            let _ = writeln!(s, "input_dim = {}", m.kernel.input_dim());
            let _ = writeln!(s, "noise_variance = {:?}", m.noise_variance);
            for (name, v) in m.kernel.named_hypers() {
                let _ = writeln!(s, "hyper.{name} = {v:?}");
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, msg: &str| Error::Parse { line, column: 1, message: msg.to_string() };
        let mut header = std::collections::BTreeMap::new();
        let mut models = Vec::new();
        // (label, scheme, family, dim, noise, hypers)
        type Pending = (String, Option<String>, Option<Family>, Option<usize>, Option<f64>, Vec<(String, f64)>);
        let mut cur: Option<(usize, Pending)> = None;
        let finish = |p: (usize, Pending)| -> Result<ModelEntry> {
            let (line, (label, scheme, family, dim, noise, hypers)) = p;
            let (Some(scheme), Some(family), Some(dim), Some(noise)) = (scheme, family, dim, noise) else {
                return Err(err(line, "model section is incomplete"));
            };
            let kernel = Kernel::from_named(family, dim, &hypers)?;
            Ok(ModelEntry { label, scheme, kernel, noise_variance: noise })
        };
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(label) = line.strip_prefix("[model ").and_then(|r| r.strip_suffix(']')) {
                if let Some(p) = cur.take() {
                    models.push(finish(p)?);
                }
                cur = Some((ln, (label.to_string(), None, None, None, None, Vec::new())));
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| err(ln, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| v.parse::<f64>().map_err(|_| err(ln, "bad number"));
            match &mut cur {
                None => {
                    header.insert(k.to_string(), v.to_string());
                }
                Some((_, p)) => match k {
                    "scheme" => p.1 = Some(v.to_string()),
                    "family" => p.2 = Some(Family::parse_tag(v)?),
                    "input_dim" => p.3 = Some(v.parse().map_err(|_| err(ln, "bad dimension"))?),
                    "noise_variance" => p.4 = Some(num(v)?),
                    _ => match k.strip_prefix("hyper.") {
                        Some(name) => p.5.push((name.to_string(), num(v)?)),
                        None => return Err(err(ln, &format!("unknown key `{k}`"))),
                    },
                },
            }
        }
        if let Some(p) = cur.take() {
            models.push(finish(p)?);
        }
        let get = |k: &str| header.get(k).cloned().ok_or_else(|| err(1, &format!("missing `{k}`")));
        let version: u32 = get("skigp-manifest")?.parse().map_err(|_| err(1, "bad version"))?;
        if version != MANIFEST_VERSION {
            return Err(err(1, &format!("unsupported manifest version {version}")));
        }
        Ok(Self {
            version,
            library_version: get("library_version")?,
            experiment: get("experiment")?,
            seed: get("seed")?.parse().map_err(|_| err(1, "bad seed"))?,
            config_sha256: get("config_sha256")?,
            models,
        })
    }
}
