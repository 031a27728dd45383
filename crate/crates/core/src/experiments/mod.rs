//! Experiment harness: configuration, data files, metrics and the three
//! experiment drivers behind the `skigp` command.

pub mod config;
pub mod data;
pub mod infill;
pub mod learning;
pub mod manifest;
pub mod metrics;
pub mod reconstruct;

use std::fs::{self, File};
use std::path::{Path, PathBuf};

pub use config::{Experiment, ExperimentConfig, Method, SchemeChoice};
pub use data::{export_csv, ingest_csv, read_csv, write_csv};
pub use infill::{run_infill, smae, InfillReport};
pub use learning::{run_kernel_learning, KernelLearnReport};
pub use manifest::{Manifest, ModelEntry};
pub use metrics::{emit_metrics, MetricsRow, Table};
pub use reconstruct::{run_reconstruct, ReconstructReport};

use crate::error::Result;

/// Everything an experiment writes to disk.
#[derive(Clone, Debug, Default)]
pub struct RunOutput {
    pub rows: Vec<MetricsRow>,
    pub models: Vec<ModelEntry>,
    pub tables: Vec<Table>,
}

impl RunOutput {
    /// Writes `metrics.csv`, `manifest.txt` and one CSV per table into `dir`.
    pub fn write(&self, dir: &Path, experiment: Experiment, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let metrics = dir.join("metrics.csv");
        emit_metrics(&self.rows, &metrics)?;
        written.push(metrics);
        let manifest = Manifest::new(experiment.name(), cfg.seed, cfg.hash(), self.models.clone());
        let path = dir.join("manifest.txt");
        fs::write(&path, manifest.to_text())?;
        written.push(path);
        fs::write(dir.join("config.txt"), cfg.to_text())?;
        written.push(dir.join("config.txt"));
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            t.write(File::create(&path)?)?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs one experiment and returns its outputs.
pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<RunOutput> {
    Ok(match experiment {
        Experiment::Reconstruct => run_reconstruct(cfg)?.output,
        Experiment::KernelLearn => run_kernel_learning(cfg)?.output,
        Experiment::Infill => run_infill(cfg)?.output,
    })
}
