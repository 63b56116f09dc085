//! CSV output, one row per (matrix, kernel).

use std::io::Write;
use std::path::Path;

use crate::bench::BenchReport;
use crate::error::{BenchError, Result};

pub const CSV_HEADER: [&str; 12] = [
    "matrix",
    "m",
    "n",
    "nnz",
    "kernel",
    "threads",
    "best_ms",
    "avg_ms",
    "gflops",
    "conv_ms",
    "speedup_n50",
    "speedup_n500",
];

#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub matrix: String,
    pub m: usize,
    pub n: usize,
    pub nnz: usize,
    pub kernel: String,
    pub threads: usize,
    pub best_ms: f64,
    pub avg_ms: f64,
    pub gflops: f64,
    pub conv_ms: Option<f64>,
    pub speedup_n50: Option<f64>,
    pub speedup_n500: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn rows_of(report: &BenchReport) -> Vec<CsvRow> {
    report
        .kernels
        .iter()
        .map(|t| CsvRow {
            matrix: report.matrix.clone(),
            m: report.rows,
            n: report.cols,
            nnz: report.nnz,
            kernel: t.kernel.clone(),
            threads: report.threads,
            best_ms: t.best_secs * 1e3,
            avg_ms: t.avg_secs * 1e3,
            gflops: t.gflops,
            conv_ms: t.conv_secs.map(|s| s * 1e3),
            speedup_n50: t.speedup_n50,
            speedup_n500: t.speedup_n500,
        })
        .collect()
}

/// Writes the header and every row. Floats use Rust's shortest round-trip
/// formatting, so the output is locale independent and parses back exactly.
pub fn write_csv<W: Write>(out: W, reports: &[BenchReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for report in reports {
        for r in rows_of(report) {
            w.write_record([
                r.matrix,
                r.m.to_string(),
                r.n.to_string(),
                r.nnz.to_string(),
                r.kernel,
                r.threads.to_string(),
                format!("{}", r.best_ms),
                format!("{}", r.avg_ms),
                format!("{}", r.gflops),
                opt(r.conv_ms),
                opt(r.speedup_n50),
                opt(r.speedup_n500),
            ])?;
        }
    }
    w.flush().map_err(|e| BenchError::io("<csv>", e))?;
    Ok(())
}

pub fn emit_csv(path: impl AsRef<Path>, reports: &[BenchReport]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    write_csv(file, reports)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    rec.get(idx)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| BenchError::Parse {
            line,
            msg: format!("bad {} field", CSV_HEADER[idx]),
        })
}

fn opt_field(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<Option<f64>> {
    match rec.get(idx) {
        Some("") => Ok(None),
        _ => field(rec, idx, line).map(Some),
    }
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<CsvRow>> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(BenchError::Parse {
            line: 1,
            msg: "unexpected header".into(),
        });
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        rows.push(CsvRow {
            matrix: field(&rec, 0, line)?,
            m: field(&rec, 1, line)?,
            n: field(&rec, 2, line)?,
            nnz: field(&rec, 3, line)?,
            kernel: field(&rec, 4, line)?,
            threads: field(&rec, 5, line)?,
            best_ms: field(&rec, 6, line)?,
            avg_ms: field(&rec, 7, line)?,
            gflops: field(&rec, 8, line)?,
            conv_ms: opt_field(&rec, 9, line)?,
            speedup_n50: opt_field(&rec, 10, line)?,
            speedup_n500: opt_field(&rec, 11, line)?,
        });
    }
    Ok(rows)
}
