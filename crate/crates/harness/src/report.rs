//! CSV and JSON output for experiment reports.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::experiment::{RawRow, Report, ReportRow};

fn csv_err(path: &str, e: csv::Error) -> HarnessError {
    HarnessError::io(path, std::io::Error::other(e))
}

/// Summary rows as CSV with header
/// `sampler,target,metric,mean,std,sem,n,excluded,seed,config_hash`.
pub fn write_rows<W: Write>(rows: &[ReportRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_raw<W: Write>(rows: &[RawRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// The sidecar: full configuration, hashes, exclusions and attachments.
pub fn sidecar(report: &Report) -> serde_json::Value {
    json!({
        "config": report.config,
        "configHash": report.config_hash,
        "datasetFingerprint": report.dataset_fingerprint,
        "exclusions": report.exclusions,
        "attachments": report.attachments,
        "logBase": "e",
    })
}

/// `<path>.json` next to the CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut s = csv_path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the CSV, its sidecar and, when present, raw rows to `<path>.raw.csv`.
pub fn write_report(report: &Report, csv_path: &Path) -> Result<()> {
    let name = csv_path.display().to_string();
    let file = std::fs::File::create(csv_path).map_err(|e| HarnessError::io(&name, e))?;
    write_rows(&report.rows, file).map_err(|e| csv_err(&name, e))?;

    let side = sidecar_path(csv_path);
    let text = serde_json::to_string_pretty(&sidecar(report)).expect("sidecar serialises");
    std::fs::write(&side, text).map_err(|e| HarnessError::io(side.display().to_string(), e))?;

    if !report.raw.is_empty() {
        let mut raw = csv_path.as_os_str().to_owned();
        raw.push(".raw.csv");
        let raw = PathBuf::from(raw);
        let rname = raw.display().to_string();
        let file = std::fs::File::create(&raw).map_err(|e| HarnessError::io(&rname, e))?;
        write_raw(&report.raw, file).map_err(|e| csv_err(&rname, e))?;
    }
    Ok(())
}
