use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::began::StepMetrics;
use crate::error::{Error, Result};

/// One row of `metrics.csv`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub step: u64,
    pub loss_real: f64,
    pub loss_gen: f64,
    pub loss_constraint: f64,
    pub k: f64,
    pub convergence_measure: f64,
    pub var_real: f64,
    pub var_gen: f64,
    pub modes_covered: usize,
    pub hq_fraction: f64,
}

/// Column order of `metrics.csv`.
pub const METRICS_COLUMNS: [&str; 10] = [
    "step",
    "loss_real",
    "loss_gen",
    "loss_constraint",
    "k",
    "convergence_measure",
    "var_real",
    "var_gen",
    "modes_covered",
    "hq_fraction",
];

/// Column order of `trace.csv`, one row per optimization step.
pub const TRACE_COLUMNS: [&str; 6] = [
    "step",
    "loss_real",
    "loss_gen",
    "loss_constraint",
    "k",
    "convergence",
];

impl MetricsRecord {
    pub fn validate(&self, num_modes: usize) -> Result<()> {
        let nonneg = [
            ("loss_real", self.loss_real),
            ("loss_gen", self.loss_gen),
            ("loss_constraint", self.loss_constraint),
            ("convergence_measure", self.convergence_measure),
            ("var_real", self.var_real),
            ("var_gen", self.var_gen),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(self.invalid(format!("{name} = {v} is not a finite non-negative value")));
            }
        }
        if !(0.0..=1.0).contains(&self.k) {
            return Err(self.invalid(format!("k = {} outside [0, 1]", self.k)));
        }
        if !(0.0..=1.0).contains(&self.hq_fraction) {
            return Err(self.invalid(format!("hq_fraction = {} outside [0, 1]", self.hq_fraction)));
        }
        if self.modes_covered > num_modes {
            return Err(self.invalid(format!(
                "modes_covered = {} exceeds {num_modes}",
                self.modes_covered
            )));
        }
        Ok(())
    }

    fn invalid(&self, detail: String) -> Error {
        Error::Format {
            path: "metrics.csv".into(),
            detail: format!("step {}: {detail}", self.step),
        }
    }
}

fn check_trace(row: &StepMetrics) -> Result<()> {
    let ok = [row.loss_real, row.loss_gen, row.loss_constraint, row.convergence]
        .iter()
        .all(|v| *v >= 0.0 && v.is_finite())
        && (0.0..=1.0).contains(&row.k);
    if ok {
        Ok(())
    } else {
        Err(Error::Format {
            path: "trace.csv".into(),
            detail: format!("step {}: row violates loss ≥ 0 or k ∈ [0, 1]", row.step),
        })
    }
}

/// The header is written explicitly so an empty table still carries it.
fn write_rows<T: Serialize>(path: &Path, columns: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    w.write_record(columns).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_rows<T: DeserializeOwned>(path: &Path, columns: &[&str]) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let header = r.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(columns.iter().copied()) {
        return Err(Error::format(
            path,
            format!("header {header:?} does not match {columns:?}"),
        ));
    }
    r.deserialize()
        .map(|row| row.map_err(|e| csv_error(path, e)))
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::format(path, format!("{other:?}")),
    }
}

/// Writes `metrics.csv` after validating every row.
pub fn write_metrics(path: &Path, rows: &[MetricsRecord], num_modes: usize) -> Result<()> {
    for r in rows {
        r.validate(num_modes)?;
    }
    write_rows(path, &METRICS_COLUMNS, rows)
}

/// Reads `metrics.csv`, checking the header and every row.
pub fn read_metrics(path: &Path, num_modes: usize) -> Result<Vec<MetricsRecord>> {
    let rows: Vec<MetricsRecord> = read_rows(path, &METRICS_COLUMNS)?;
    for r in &rows {
        r.validate(num_modes).map_err(|e| Error::format(path, e.to_string()))?;
    }
    Ok(rows)
}

pub fn write_trace(path: &Path, rows: &[StepMetrics]) -> Result<()> {
    rows.iter().try_for_each(check_trace)?;
    write_rows(path, &TRACE_COLUMNS, rows)
}

pub fn read_trace(path: &Path) -> Result<Vec<StepMetrics>> {
    let rows: Vec<StepMetrics> = read_rows(path, &TRACE_COLUMNS)?;
    rows.iter()
        .try_for_each(check_trace)
        .map_err(|e| Error::format(path, e.to_string()))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(step: u64, k: f64) -> MetricsRecord {
        MetricsRecord {
            step,
            loss_real: 0.1,
            loss_gen: 0.2,
            loss_constraint: 3.0,
            k,
            convergence_measure: 0.4,
            var_real: 1.5,
            var_gen: 0.5,
            modes_covered: 20,
            hq_fraction: 0.75,
        }
    }

    #[test]
    fn header_order_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("metrics.csv");
        let rows = vec![rec(0, 0.0), rec(500, 0.1 + 0.2)];
        write_metrics(&p, &rows, 25).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap(), METRICS_COLUMNS.join(","));
        assert_eq!(read_metrics(&p, 25).unwrap(), rows);
    }

    #[test]
    fn invalid_rows_are_refused_on_write_and_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("metrics.csv");
        assert!(write_metrics(&p, &[rec(1, 1.5)], 25).is_err());
        let mut bad = rec(1, 0.5);
        bad.modes_covered = 26;
        assert!(write_metrics(&p, &[bad], 25).is_err());

        write_metrics(&p, &[rec(1, 0.5)], 25).unwrap();
        let text = std::fs::read_to_string(&p).unwrap().replace(",0.5,", ",-0.5,");
        std::fs::write(&p, text).unwrap();
        assert!(matches!(read_metrics(&p, 25), Err(Error::Format { .. })));
    }

    #[test]
    fn wrong_header_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("metrics.csv");
        std::fs::write(&p, "step,k\n1,0.5\n").unwrap();
        assert!(matches!(read_metrics(&p, 25), Err(Error::Format { .. })));
    }
}
