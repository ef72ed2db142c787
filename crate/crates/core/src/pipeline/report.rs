use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::campaign::{CampaignCell, CellStatus};
use super::dataset::write_file;
use crate::{Error, Result};

pub const METRICS: [&str; 4] = ["mae", "maxae", "rmse", "r2"];

/// The JSON form of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub rows: Vec<CampaignCell>,
}

/// Serialised report artifacts.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    /// One line per cell: `model_id,training_size,status,mae,maxae,rmse,r2,ridge`.
    pub csv: String,
    pub json: String,
    /// Metric name to a CSV with one column per model and one row per training size.
    pub series: BTreeMap<String, String>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn metric(cell: &CampaignCell, name: &str) -> Option<f64> {
    let s = cell.scores?;
    Some(match name {
        "mae" => s.mae,
        "maxae" => s.maxae,
        "rmse" => s.rmse,
        _ => s.r2,
    })
}

fn to_csv(rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::numerical(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn export_document(doc: &ReportDocument) -> Result<Report> {
    if doc.rows.is_empty() {
        return Err(Error::validation("rows", "a report needs at least one row"));
    }
    let mut table = vec![["model_id", "training_size", "status", "mae", "maxae", "rmse", "r2", "ridge"]
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()];
    for c in &doc.rows {
        let status = match c.status {
            CellStatus::Ok => "ok",
            CellStatus::Failed => "failed",
        };
        let mut line = vec![c.model_id.clone(), c.training_size.to_string(), status.to_string()];
        line.extend(METRICS.iter().map(|m| fmt_opt(metric(c, m))));
        line.push(fmt_opt(c.ridge));
        table.push(line);
    }
    let csv = to_csv(table)?;

    let mut models: Vec<&str> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for c in &doc.rows {
        if !models.contains(&c.model_id.as_str()) {
            models.push(&c.model_id);
        }
        if !sizes.contains(&c.training_size) {
            sizes.push(c.training_size);
        }
    }
    sizes.sort_unstable();
    let mut series = BTreeMap::new();
    for m in METRICS {
        let mut header = vec!["training_size".to_string()];
        header.extend(models.iter().map(|s| s.to_string()));
        let mut table = vec![header];
        for &n in &sizes {
            let mut line = vec![n.to_string()];
            for model in &models {
                let v = doc
                    .rows
                    .iter()
                    .find(|c| c.training_size == n && c.model_id == *model)
                    .and_then(|c| metric(c, m));
                line.push(fmt_opt(v));
            }
            table.push(line);
        }
        series.insert(m.to_string(), to_csv(table)?);
    }
    let json = serde_json::to_string_pretty(doc)?;
    Ok(Report { csv, json, series })
}

/// Report for bare rows, without campaign provenance.
pub fn export_report(rows: &[CampaignCell]) -> Result<Report> {
    export_document(&ReportDocument { config_hash: None, seed: None, rows: rows.to_vec() })
}

pub fn parse_report_json(text: &str) -> Result<ReportDocument> {
    Ok(serde_json::from_str(text)?)
}

/// Writes `metrics.csv`, `report.json` and `series_<metric>.csv` into `dir`.
pub fn write_report(dir: &Path, report: &Report) -> Result<()> {
    write_file(&dir.join("metrics.csv"), &report.csv)?;
    write_file(&dir.join("report.json"), &report.json)?;
    for (metric, text) in &report.series {
        write_file(&dir.join(format!("series_{metric}.csv")), text)?;
    }
    Ok(())
}
