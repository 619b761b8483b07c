//! CSV tables and JSON documents.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use masolve_core::metrics::convexity_diagnostics;
use masolve_core::{GridSpec, ScalarField};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::harness::{SolveOutcome, StudyRecord};

pub const CSV_HEADER: [&str; 11] = [
    "problem",
    "method",
    "n",
    "iterations",
    "converged",
    "wall_time_seconds",
    "sup_error",
    "l2_error",
    "l2_error_raw",
    "marked_final",
    "min_value",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn opt_float(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_csv<W: Write>(writer: W, records: &[StudyRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.problem.clone(),
            r.method.to_string(),
            r.n.to_string(),
            r.iterations.to_string(),
            r.converged.to_string(),
            format_float(r.wall_time_seconds),
            opt_float(r.sup_error),
            opt_float(r.l2_error),
            opt_float(r.l2_error_raw),
            r.marked_final.map(|m| m.to_string()).unwrap_or_default(),
            format_float(r.min_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a table produced by [`write_csv`].
pub fn read_csv<R: Read>(reader: R) -> Result<Vec<StudyRecord>> {
    fn num<T: std::str::FromStr>(s: &str, col: &str) -> Result<T> {
        s.parse()
            .map_err(|_| HarnessError::Config(format!("bad value `{s}` in column {col}")))
    }
    fn opt<T: std::str::FromStr>(s: &str, col: &str) -> Result<Option<T>> {
        if s.is_empty() {
            Ok(None)
        } else {
            num(s, col).map(Some)
        }
    }
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::Config("unexpected CSV header".into()));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        out.push(StudyRecord {
            problem: row[0].to_owned(),
            method: row[1].parse()?,
            n: num(&row[2], "n")?,
            iterations: num(&row[3], "iterations")?,
            converged: num(&row[4], "converged")?,
            wall_time_seconds: num(&row[5], "wall_time_seconds")?,
            sup_error: opt(&row[6], "sup_error")?,
            l2_error: opt(&row[7], "l2_error")?,
            l2_error_raw: opt(&row[8], "l2_error_raw")?,
            marked_final: opt(&row[9], "marked_final")?,
            min_value: num(&row[10], "min_value")?,
        });
    }
    Ok(out)
}

pub fn write_csv_file(path: &Path, records: &[StudyRecord]) -> Result<()> {
    write_csv(BufWriter::new(File::create(path)?), records)
}

pub fn write_json_file(path: &Path, records: &[StudyRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, records)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDoc {
    /// `[x_min, x_max, y_min, y_max]`.
    pub bounds: [f64; 4],
    pub n: usize,
}

impl GridDoc {
    pub fn from_grid(g: &GridSpec) -> Self {
        GridDoc {
            bounds: [g.x_min, g.x_max, g.y_min, g.y_max],
            n: g.n(),
        }
    }

    pub fn to_grid(self) -> Result<GridSpec> {
        let [a, b, c, d] = self.bounds;
        Ok(GridSpec::new(a, b, c, d, self.n)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub converged: bool,
    pub iterations: usize,
    pub update_norms: Vec<f64>,
    pub marked_counts: Vec<usize>,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub sup_error: Option<f64>,
    pub l2_error: Option<f64>,
    pub l2_error_raw: Option<f64>,
    pub marked_final: Option<usize>,
    pub min_value: f64,
    pub convexity_failures: usize,
}

/// Full result of a single solve, including the solution values in
/// row-major order (`index = j·n + i`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDoc {
    pub problem: String,
    pub method: String,
    pub n: usize,
    pub grid: GridDoc,
    pub report: ReportDoc,
    pub metrics: MetricsDoc,
    pub solution: Vec<f64>,
}

impl SolveDoc {
    pub fn from_outcome(out: &SolveOutcome, det_floor: f64) -> Self {
        let r = &out.record;
        SolveDoc {
            problem: r.problem.clone(),
            method: r.method.to_string(),
            n: r.n,
            grid: GridDoc::from_grid(&out.grid),
            report: ReportDoc {
                converged: out.report.converged,
                iterations: out.report.iterations,
                update_norms: out.report.update_norms.clone(),
                marked_counts: out.report.marked_counts.clone(),
                wall_time_seconds: out.report.wall_time_seconds,
            },
            metrics: MetricsDoc {
                sup_error: r.sup_error,
                l2_error: r.l2_error,
                l2_error_raw: r.l2_error_raw,
                marked_final: r.marked_final,
                min_value: r.min_value,
                convexity_failures: convexity_diagnostics(&out.report.solution, det_floor).failures,
            },
            solution: out.report.solution.values().to_vec(),
        }
    }

    pub fn solution_field(&self) -> Result<ScalarField> {
        Ok(ScalarField::from_values(self.grid.to_grid()?, self.solution.clone())?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer(&mut w, self)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(File::open(path)?))?)
    }
}
