//! CSV and JSON writers for benchmark outputs.
//!
//! All numeric fields are written with Rust's shortest round-trip float
//! formatting, so reading a file back reproduces the exact `f64` values and
//! identical runs produce byte-identical summaries.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use spikedcov::numkernel::{C64, CMat};

use crate::experiment::{SummaryRow, TrialRecord};
use crate::{BenchError, BenchResult};

/// Writes per-trial records with one row per (trial, method) pair.
/// Degenerate error measures appear as empty cells.
pub fn write_trials_csv<W: Write>(writer: W, records: &[TrialRecord]) -> BenchResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "n",
        "dof",
        "trial",
        "method",
        "err_total",
        "err_subspace",
        "status",
        "iterations",
        "seconds",
        "seed",
    ])?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            format!("{}", r.dof),
            r.trial.to_string(),
            r.method.as_str().to_string(),
            r.err_total.map_or(String::new(), |v| format!("{v}")),
            r.err_subspace.map_or(String::new(), |v| format!("{v}")),
            r.status.clone(),
            r.iterations.to_string(),
            format!("{:.6}", r.seconds),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes aggregated dB curve points.
pub fn write_summary_csv<W: Write>(writer: W, rows: &[SummaryRow]) -> BenchResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["n", "dof", "method_or_bound", "metric", "value_db", "count"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            format!("{}", r.dof),
            r.series.clone(),
            r.metric.to_string(),
            format!("{}", r.value_db),
            r.count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row of the `bench bounds` table.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsRow {
    pub p: usize,
    pub k: usize,
    pub n: usize,
    pub alpha_pp: f64,
    pub bound_name: String,
    pub value: f64,
}

/// Writes Cramér-Rao bound values, one named bound per row.
pub fn write_bounds_csv<W: Write>(writer: W, rows: &[BoundsRow]) -> BenchResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["p", "k", "n", "alpha_pp", "bound_name", "value"])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.k.to_string(),
            r.n.to_string(),
            format!("{}", r.alpha_pp),
            r.bound_name.clone(),
            format!("{}", r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a complex matrix as a real CSV with interleaved row pairs: row
/// `2i` holds the real part of matrix row `i`, row `2i+1` its imaginary
/// part. An `m×n` complex matrix therefore becomes `2m×n` real values.
pub fn write_complex_matrix_csv<W: Write>(writer: W, m: &CMat) -> BenchResult<()> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> = (1..=m.ncols()).map(|j| format!("c{j}")).collect();
    w.write_record(&header)?;
    for i in 0..m.nrows() {
        let re: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)].re)).collect();
        w.write_record(&re)?;
        let im: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)].im)).collect();
        w.write_record(&im)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a complex matrix written by [`write_complex_matrix_csv`].
pub fn read_complex_matrix_csv<R: Read>(reader: R) -> BenchResult<CMat> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = 0usize;
    for (idx, record) in r.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(record.len());
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|e| {
                BenchError::Config(format!(
                    "matrix csv data row {}: bad number '{field}' ({e})",
                    idx + 1
                ))
            })?;
            row.push(v);
        }
        if idx == 0 {
            width = row.len();
        } else if row.len() != width {
            return Err(BenchError::Config(format!(
                "matrix csv data row {}: expected {width} columns, got {}",
                idx + 1,
                row.len()
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() || rows.len() % 2 != 0 {
        return Err(BenchError::Config(format!(
            "matrix csv must hold an even, positive number of data rows \
             (real/imaginary pairs), got {}",
            rows.len()
        )));
    }
    let m = rows.len() / 2;
    let out = CMat::from_fn(m, width, |i, j| C64::new(rows[2 * i][j], rows[2 * i + 1][j]));
    Ok(out)
}

/// Fit report emitted next to the estimate factors.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EstimateReport {
    pub method: String,
    pub p: usize,
    pub k: usize,
    pub n: usize,
    /// Tail index behind the metric weights, when one was supplied.
    pub dof: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    /// Tyler cost at the returned point.
    pub cost: f64,
    /// Riemannian gradient norm of the Tyler cost at the returned point.
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: String,
}

pub fn write_report_json<W: Write>(mut writer: W, report: &EstimateReport) -> BenchResult<()> {
    serde_json::to_writer_pretty(&mut writer, report)
        .map_err(|e| BenchError::Config(format!("report serialization failed: {e}")))?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_report_json<R: Read>(reader: R) -> BenchResult<EstimateReport> {
    serde_json::from_reader(reader)
        .map_err(|e| BenchError::Config(format!("report parse failed: {e}")))
}

/// Convenience file-writing wrapper used by the CLI.
pub fn write_file<P, F>(path: P, write: F) -> BenchResult<()>
where
    P: AsRef<Path>,
    F: FnOnce(&mut std::io::BufWriter<std::fs::File>) -> BenchResult<()>,
{
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    write(&mut buf)?;
    use std::io::Write as _;
    buf.flush()?;
    Ok(())
}
