use std::path::Path;

use serde::{Deserialize, Serialize};

use super::eval::EvalRow;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = ["corruption", "severity", "model", "accuracy", "oob_rate", "n"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config_hash: String,
    pub seed: u64,
    /// Seconds since the Unix epoch; kept out of the CSV so reruns compare
    /// byte for byte.
    pub timestamp: u64,
}

impl ReportMetadata {
    pub fn now(config_hash: String, seed: u64) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            config_hash,
            seed,
            timestamp,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub metadata: ReportMetadata,
}

impl EvalReport {
    pub fn clean_accuracy(&self, model: &str) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.corruption == "clean" && r.model == model)
            .map(|r| r.accuracy)
    }

    pub fn row(&self, corruption: &str, severity: u8, model: &str) -> Option<&EvalRow> {
        self.rows
            .iter()
            .find(|r| r.corruption == corruption && r.severity == severity && r.model == model)
    }
}

pub fn render_csv(rows: &[EvalRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.corruption.clone(),
            r.severity.to_string(),
            r.model.clone(),
            format!("{:.4}", r.accuracy),
            format!("{:.4}", r.oob_rate),
            r.n.to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes the CSV table to `path` and a JSON sidecar with the metadata and
/// `extra` next to it (same stem, `.json`).
pub fn emit_report(report: &EvalReport, path: &Path, extra: serde_json::Value) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, render_csv(&report.rows)?).map_err(|e| Error::io(path, e))?;
    let sidecar = serde_json::json!({
        "metadata": report.metadata,
        "extra": extra,
    });
    let side_path = path.with_extension("json");
    std::fs::write(&side_path, serde_json::to_string_pretty(&sidecar)? + "\n").map_err(|e| Error::io(&side_path, e))
}
