use std::path::Path;

use atd3_eval::mean_std;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub fn ensure_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Output {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// One row of a `condition,mean,std` summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub condition: String,
    pub mean: f64,
    pub std: f64,
}

impl SummaryRow {
    pub fn from_values(condition: impl Into<String>, values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Self {
            condition: condition.into(),
            mean,
            std,
        }
    }
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["condition", "mean", "std"])?;
    for r in rows {
        w.write_record([r.condition.clone(), r.mean.to_string(), r.std.to_string()])?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    write_text(path, &String::from_utf8_lossy(&bytes))
}
