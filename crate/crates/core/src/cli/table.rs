//! CSV output tables.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which round-trips
//! every `f64` exactly. Absent values are empty fields.

use std::fs::File;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::solver::{IterationTrace, TraceRow};

pub const TRACE_HEADER: [&str; 4] = ["k", "x_k", "bound", "residual"];

#[derive(Debug, Error)]
pub enum TableError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("malformed trace: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to(&self, path: &Path) -> Result<(), TableError> {
        let file = File::create(path).map_err(|source| TableError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let csv_err = |source| TableError::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|source| TableError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "NaN".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn trace_table(trace: &IterationTrace) -> Table {
    let mut t = Table::new(&TRACE_HEADER);
    for r in &trace.rows {
        t.push(vec![
            r.k.to_string(),
            fmt_f64(r.x),
            fmt_opt(r.bound),
            fmt_f64(r.residual),
        ]);
    }
    t
}

/// Writes `k,x_k,bound,residual`, one row per iterate.
pub fn emit_trace(trace: &IterationTrace, path: &Path) -> Result<(), TableError> {
    trace_table(trace).write_to(path)
}

/// Reads a table written by [`emit_trace`].
pub fn parse_trace(input: &[u8]) -> Result<Vec<TraceRow>, TableError> {
    let bad = |m: String| TableError::Parse(m);
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input);
    let header = r
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .iter()
        .collect::<Vec<_>>();
    if header != TRACE_HEADER {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let float = |s: &str, col: &str| -> Result<f64, TableError> {
        s.parse::<f64>()
            .map_err(|_| bad(format!("column {col}: {s:?} is not a number")))
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != TRACE_HEADER.len() {
            return Err(bad(format!("expected 4 fields, got {}", rec.len())));
        }
        let k = rec[0]
            .parse::<usize>()
            .map_err(|_| bad(format!("column k: {:?} is not an index", &rec[0])))?;
        let bound = match &rec[2] {
            "" => None,
            s => Some(float(s, "bound")?),
        };
        rows.push(TraceRow {
            k,
            x: float(&rec[1], "x_k")?,
            bound,
            residual: float(&rec[3], "residual")?,
        });
    }
    Ok(rows)
}
