use std::fs::File;
use std::io::Write;
use std::path::Path;

use crate::error::Result;

pub const METRICS_HEADER: [&str; 8] =
    ["method", "m", "build_time_s", "solve_time_s", "mae", "smae", "logdet_err", "notes"];

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub m: Option<usize>,
    pub build_time_s: f64,
    pub solve_time_s: Option<f64>,
    pub mae: Option<f64>,
    pub smae: Option<f64>,
    pub logdet_err: Option<f64>,
    pub notes: String,
}

impl MetricsRow {
    pub fn new(method: impl Into<String>, m: Option<usize>, build_time_s: f64) -> Self {
        Self {
            method: method.into(),
            m,
            build_time_s,
            solve_time_s: None,
            mae: None,
            smae: None,
            logdet_err: None,
            notes: String::new(),
        }
    }
}

/// Twelve significant digits in scientific notation. Parsing the output and
/// formatting again yields the same string.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Writes rows as CSV with the fixed column order of [`METRICS_HEADER`].
pub fn write_metrics<W: Write>(rows: &[MetricsRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.m.map(|m| m.to_string()).unwrap_or_default(),
            fmt_num(r.build_time_s),
            opt(r.solve_time_s),
            opt(r.mae),
            opt(r.smae),
            opt(r.logdet_err),
            r.notes.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_metrics(rows: &[MetricsRow], path: &Path) -> Result<()> {
    write_metrics(rows, File::create(path)?)
}

/// A plain numeric table written alongside the metrics (curves, traces).
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn write<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|&v| fmt_num(v)))?;
        }
        w.flush()?;
        Ok(())
    }
}
