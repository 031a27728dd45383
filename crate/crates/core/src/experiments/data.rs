//! CSV ingestion and export.
//!
//! Files carry a header row. The last column is the target and all earlier
//! columns are inputs. A `NaN` or empty target marks a point to predict.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::gp::Dataset;
use crate::points::Points;

fn cell(value: &str, line: usize, column: usize, allow_missing: bool) -> Result<f64> {
    let v = value.trim();
    if allow_missing && (v.is_empty() || v.eq_ignore_ascii_case("nan")) {
        return Ok(f64::NAN);
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Parse { line, column, message: format!("`{v}` is not a finite number") }),
    }
}

/// Reads a dataset. Rows with a missing target go to the test inputs,
/// without test targets.
pub fn read_csv<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let width = rdr.headers()?.len();
    if width < 2 {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "need at least one input and one target column".into(),
        });
    }
    let dim = width - 1;
    let (mut train, mut y, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut row = Vec::with_capacity(dim);
        for (c, v) in rec.iter().take(dim).enumerate() {
            row.push(cell(v, line, c + 1, false)?);
        }
        let target = cell(&rec[dim], line, width, true)?;
        if target.is_nan() {
            test.extend(row);
        } else {
            train.extend(row);
            y.push(target);
        }
    }
    if y.is_empty() {
        return Err(Error::InvalidArgument("file has no observed rows".into()));
    }
    let data = Dataset::new(Points::new(train, dim)?, y)?;
    if test.is_empty() {
        Ok(data)
    } else {
        data.with_test(Points::new(test, dim)?, None)
    }
}

pub fn ingest_csv(path: &Path) -> Result<Dataset> {
    read_csv(File::open(path)?)
}

/// Writes training rows, then test inputs with `NaN` targets. Values use
/// the shortest representation that parses back to the same bits.
pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let dim = data.x.dim();
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = if dim == 1 { vec!["t".into()] } else { (0..dim).map(|p| format!("x{p}")).collect() };
    header.push("y".into());
    w.write_record(&header)?;
    for (x, y) in data.x.iter().zip(&data.y) {
        w.write_record(x.iter().chain([y]).map(|v| format!("{v:?}")))?;
    }
    if let Some(t) = &data.test_x {
        for x in t.iter() {
            w.write_record(x.iter().map(|v| format!("{v:?}")).chain(["NaN".to_string()]))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn export_csv(data: &Dataset, path: &Path) -> Result<()> {
    write_csv(data, File::create(path)?)
}

/// One-line summary: row counts and per-axis bounds.
pub fn describe(data: &Dataset) -> String {
    let bounds: Vec<String> = data.x.bounds().iter().map(|(a, b)| format!("[{a}, {b}]")).collect();
    format!(
        "n_train = {}, n_test = {}, bounds = {}",
        data.n(),
        data.test_x.as_ref().map_or(0, |t| t.len()),
        bounds.join(" x ")
    )
}
