//! CSV files. Floats use C `%.5e` notation (`1.23457e+04`), lines end in LF.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::HarnessError;
use crate::experiment::{CellSummary, Comparison, RunFailure, RunRecord, TraceRow};

/// Scientific notation with six significant digits and a signed two-digit
/// exponent, matching C's `%.5e`.
pub fn fmt_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let s = format!("{x:.5e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>, HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<(), HarnessError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let io = |e: csv::Error| HarnessError::io(path, e.into());
    let mut w = writer(path)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| HarnessError::io(path, e.into_error()))?
        .flush()
        .map_err(|e| HarnessError::io(path, e))
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "problem",
    "dim",
    "algorithm",
    "mode",
    "mean_error",
    "std_dev",
    "runs",
];
pub const PAIRWISE_HEADER: [&str; 6] = ["problem", "algA", "algB", "W", "p", "verdict"];
pub const TRACE_HEADER: [&str; 4] = ["generation", "fes", "best_error", "p_m"];
pub const RUNS_HEADER: [&str; 8] = [
    "problem",
    "dim",
    "algorithm",
    "mode",
    "run",
    "seed",
    "final_error",
    "fes_used",
];

pub fn write_summary(path: &Path, cells: &[CellSummary]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &SUMMARY_HEADER,
        cells.iter().map(|c| {
            vec![
                c.problem.clone(),
                c.dim.to_string(),
                c.algorithm.clone(),
                c.mode.clone(),
                fmt_sci(c.mean_error),
                fmt_sci(c.std_dev),
                c.runs.to_string(),
            ]
        }),
    )
}

pub fn write_pairwise(path: &Path, comparisons: &[Comparison]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &PAIRWISE_HEADER,
        comparisons.iter().map(|c| {
            vec![
                c.problem.clone(),
                c.a.clone(),
                c.b.clone(),
                fmt_sci(c.test.w),
                fmt_sci(c.test.p),
                c.test.verdict.symbol().to_string(),
            ]
        }),
    )
}

pub fn write_trace(path: &Path, trace: &[TraceRow]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &TRACE_HEADER,
        trace.iter().map(|t| {
            vec![
                t.generation.to_string(),
                t.fes.to_string(),
                fmt_sci(t.best_error),
                fmt_sci(t.p_m),
            ]
        }),
    )
}

pub fn write_runs(path: &Path, records: &[RunRecord]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &RUNS_HEADER,
        records.iter().map(|r| {
            vec![
                r.problem.clone(),
                r.dim.to_string(),
                r.algorithm.clone(),
                r.mode.clone(),
                r.run_index.to_string(),
                r.seed.to_string(),
                fmt_sci(r.final_error),
                r.fes_used.to_string(),
            ]
        }),
    )
}

pub fn write_failures(path: &Path, failures: &[RunFailure]) -> Result<(), HarnessError> {
    write_rows(
        path,
        &["problem", "algorithm", "mode", "run", "seed", "message"],
        failures.iter().map(|f| {
            vec![
                f.problem.clone(),
                f.algorithm.clone(),
                f.mode.clone(),
                f.run_index.to_string(),
                f.seed.to_string(),
                f.message.clone(),
            ]
        }),
    )
}

/// One row of `runs.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub problem: String,
    pub algorithm: String,
    pub mode: String,
    pub final_error: f64,
}

pub fn read_runs(path: &Path) -> Result<Vec<RunRow>, HarnessError> {
    let bad = |m: String| HarnessError::Runtime(format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => HarnessError::io(path, io),
        other => bad(format!("{other:?}")),
    })?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != RUNS_HEADER {
        return Err(bad("unexpected header".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let final_error = record[6]
            .parse()
            .map_err(|_| bad(format!("bad error value `{}`", &record[6])))?;
        rows.push(RunRow {
            problem: record[0].to_string(),
            algorithm: record[2].to_string(),
            mode: record[3].to_string(),
            final_error,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(fmt_sci(12345.678), "1.23457e+04");
        assert_eq!(fmt_sci(0.0), "0.00000e+00");
        assert_eq!(fmt_sci(2e-8), "2.00000e-08");
        assert_eq!(fmt_sci(-1.5e-120), "-1.50000e-120");
        assert_eq!(fmt_sci(0.5), "5.00000e-01");
        assert_eq!(fmt_sci(1e300), "1.00000e+300");
    }

    #[test]
    fn round_trips_through_parse() {
        for x in [0.0, 1.0, 1234.5678, 1e-9, 7.5e12] {
            let back: f64 = fmt_sci(x).parse().unwrap();
            assert!((back - x).abs() <= 1e-5 * x.abs());
        }
    }
}
