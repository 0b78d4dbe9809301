//! Trace files: JSON lines (header object, then one object per record) or
//! CSV (one row per record, floats with 17 significant digits).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use surfmin::objectives::problems::ExampleProblem;
use surfmin::solvers::{IterationRecord, Phase, Termination, Trace};
use thiserror::Error;

use crate::config::{RunConfig, TraceFormat};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad value in column {column} of row {row}: '{value}'")]
    BadCell { row: usize, column: String, value: String },
}

/// Name of the generator behind every seeded draw.
pub const GENERATOR: &str = "splitmix64";

#[derive(Debug, Serialize)]
pub struct ProblemMeta {
    pub id: String,
    pub surface: &'static str,
    pub dim: usize,
    pub reach: f64,
    pub min_value: Option<f64>,
    pub lpl_exponent: Option<f64>,
}

impl ProblemMeta {
    pub fn of(problem: &ExampleProblem) -> Self {
        Self {
            id: problem.id.clone(),
            surface: problem.surface.kind(),
            dim: problem.surface.dim(),
            reach: problem.surface.reach(),
            min_value: problem.min_value,
            lpl_exponent: problem.lpl_exponent,
        }
    }
}

/// First line of a JSON-lines trace.
#[derive(Debug, Serialize)]
pub struct TraceHeader<'a> {
    pub config: &'a RunConfig,
    pub problem: ProblemMeta,
    pub seed: u64,
    pub generator: &'static str,
    pub constants: &'a BTreeMap<String, f64>,
    pub termination: &'a Termination,
    pub iterations: usize,
}

impl<'a> TraceHeader<'a> {
    pub fn new(config: &'a RunConfig, problem: &ExampleProblem, trace: &'a Trace) -> Self {
        Self {
            config,
            problem: ProblemMeta::of(problem),
            seed: config.solver.seed,
            generator: GENERATOR,
            constants: &trace.constants,
            termination: &trace.termination,
            iterations: trace.iterations(),
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `trace` to `path` in the given format.
pub fn emit_trace(header: &TraceHeader<'_>, trace: &Trace, format: TraceFormat, path: &Path) -> Result<(), OutputError> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    match format {
        TraceFormat::Jsonl => write_jsonl(header, trace, &mut out).map_err(io_error(path))?,
        TraceFormat::Csv => write_csv(trace, &mut out)?,
    }
    out.flush().map_err(io_error(path))
}

fn write_jsonl(header: &TraceHeader<'_>, trace: &Trace, out: &mut impl Write) -> io::Result<()> {
    serde_json::to_writer(&mut *out, header)?;
    out.write_all(b"\n")?;
    for record in &trace.records {
        serde_json::to_writer(&mut *out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

const FIXED_COLUMNS: [&str; 7] = ["k", "f", "proj_grad_norm", "step_norm", "residual_z", "phase", "kkt_residual"];

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn write_csv(trace: &Trace, out: &mut impl Write) -> Result<(), OutputError> {
    let dim = trace.final_x.len();
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<String> = FIXED_COLUMNS.iter().map(|c| c.to_string()).collect();
    header.extend((0..dim).map(|i| format!("x{i}")));
    writer.write_record(&header)?;
    for r in &trace.records {
        let mut row = vec![
            r.k.to_string(),
            float(r.f),
            float(r.proj_grad_norm),
            float(r.step_norm),
            optional(r.residual_z),
            r.phase.map(|p| p.to_string()).unwrap_or_default(),
            optional(r.kkt_residual),
        ];
        row.extend(r.x.iter().map(|v| float(*v)));
        writer.write_record(&row)?;
    }
    writer.flush().map_err(|e| OutputError::Csv(e.into()))?;
    Ok(())
}

/// One CSV row read back from a trace file.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvRecord {
    pub k: usize,
    pub f: f64,
    pub proj_grad_norm: f64,
    pub step_norm: f64,
    pub residual_z: Option<f64>,
    pub phase: Option<Phase>,
    pub kkt_residual: Option<f64>,
    pub x: Vec<f64>,
}

impl CsvRecord {
    /// Whether the row carries exactly the values of `record`.
    pub fn matches(&self, record: &IterationRecord) -> bool {
        let same = |a: f64, b: f64| a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan());
        let same_opt = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => same(a, b),
            (None, None) => true,
            _ => false,
        };
        self.k == record.k
            && same(self.f, record.f)
            && same(self.proj_grad_norm, record.proj_grad_norm)
            && same(self.step_norm, record.step_norm)
            && same_opt(self.residual_z, record.residual_z)
            && self.phase == record.phase
            && same_opt(self.kkt_residual, record.kkt_residual)
            && self.x.len() == record.x.len()
            && self.x.iter().zip(record.x.iter()).all(|(a, b)| same(*a, *b))
    }
}

/// Reads a CSV trace written by [`emit_trace`].
pub fn read_csv_trace(path: &Path) -> Result<Vec<CsvRecord>, OutputError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let mut rows = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let record = result?;
        let cell = |i: usize| record.get(i).unwrap_or("");
        let bad = |i: usize| OutputError::BadCell {
            row,
            column: headers.get(i).unwrap_or("?").to_string(),
            value: cell(i).to_string(),
        };
        let num = |i: usize| cell(i).parse::<f64>().map_err(|_| bad(i));
        let opt = |i: usize| if cell(i).is_empty() { Ok(None) } else { num(i).map(Some) };
        let phase = match cell(5) {
            "" => None,
            "gradient" => Some(Phase::Gradient),
            "newton" => Some(Phase::Newton),
            _ => return Err(bad(5)),
        };
        rows.push(CsvRecord {
            k: cell(0).parse().map_err(|_| bad(0))?,
            f: num(1)?,
            proj_grad_norm: num(2)?,
            step_norm: num(3)?,
            residual_z: opt(4)?,
            phase,
            kkt_residual: opt(6)?,
            x: (FIXED_COLUMNS.len()..record.len()).map(num).collect::<Result<_, _>>()?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::run::execute;
    use surfmin::solvers::Algorithm;

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let config = RunConfig::new("quad-diag:1,2,3", Algorithm::Gpa3);
        let (problem, run) = execute(&config).unwrap();
        let trace = run.unwrap();
        emit_trace(&TraceHeader::new(&config, &problem, &trace), &trace, TraceFormat::Csv, &path).unwrap();
        let rows = read_csv_trace(&path).unwrap();
        assert_eq!(rows.len(), trace.records.len());
        for (row, record) in rows.iter().zip(&trace.records) {
            assert!(row.matches(record), "{row:?} vs {record:?}");
        }
    }

    #[test]
    fn jsonl_is_header_plus_one_line_per_record() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        // starting at the minimizer stops at once
        let mut config = RunConfig::new("quad-diag:1,2,10", Algorithm::SphereGpa);
        config.x0 = crate::config::StartPoint::Explicit(vec![1.0, 0.0, 0.0]);
        let (problem, run) = execute(&config).unwrap();
        let trace = run.unwrap();
        emit_trace(&TraceHeader::new(&config, &problem, &trace), &trace, TraceFormat::Jsonl, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let header: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(header["seed"], 0);
        assert_eq!(header["generator"], GENERATOR);
        assert_eq!(header["config"]["algorithm"], "sphere-gpa");
        assert_eq!(header["constants"]["t"], 0.05);
        let record: serde_json::Value = serde_json::from_str(lines[1]).unwrap();
        for field in ["k", "f", "proj_grad_norm", "step_norm", "residual_z", "phase"] {
            assert!(record.get(field).is_some(), "{field}");
        }
    }
}
