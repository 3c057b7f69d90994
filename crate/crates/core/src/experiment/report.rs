//! Writing experiment outputs to a directory.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::ExperimentReport;
use crate::error::Result;

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Write `trials.csv`, `summary.json`, and, when present, `tail_curve.csv` and
/// `sweep.csv` into `dir`. Returns the paths written.
pub fn write_outputs(report: &ExperimentReport, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let trials = dir.join("trials.csv");
    write_rows(&trials, &report.records)?;
    written.push(trials);

    if !report.tail_curve.is_empty() {
        let path = dir.join("tail_curve.csv");
        write_rows(&path, &report.tail_curve)?;
        written.push(path);
    }
    if !report.sweep_rows.is_empty() {
        let path = dir.join("sweep.csv");
        write_rows(&path, &report.sweep_rows)?;
        written.push(path);
    }

    let summary = dir.join("summary.json");
    std::fs::write(&summary, serde_json::to_string_pretty(&report.summary)?)?;
    written.push(summary);
    Ok(written)
}
