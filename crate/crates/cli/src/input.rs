//! Panel CSV loading.
//!
//! The first row holds series names. With `time_column` set, the first
//! column holds period labels and is kept as the panel's time index. Every
//! other cell must be a finite number written with a `.` decimal point.

use std::io::Read;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use fracoint::series::{log_and_diff, log_levels};
use fracoint::Panel;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadOptions {
    pub delimiter: u8,
    pub time_column: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { delimiter: b',', time_column: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    #[default]
    None,
    Log,
    LogDiff,
}

impl Transform {
    pub fn apply(self, panel: &Panel) -> Result<Panel> {
        let module = "transform";
        match self {
            Transform::None => Ok(panel.clone()),
            Transform::Log => log_levels(panel).map_err(CliError::core(module)),
            Transform::LogDiff => log_and_diff(panel).map_err(CliError::core(module)),
        }
    }
}

const MISSING: [&str; 6] = ["", "na", "nan", "n/a", "null", "."];

pub fn load_csv(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Panel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| CliError::Read { path: path.into(), source })?;
    read_panel(file, options, path)
}

/// Parses panel CSV from any reader; `origin` names the source in errors.
pub fn read_panel<R: Read>(reader: R, options: &LoadOptions, origin: &Path) -> Result<Panel> {
    let fail = |message: String| CliError::Data { path: PathBuf::from(origin), message };
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Vec<String> = rdr.headers().map_err(|e| fail(e.to_string()))?.iter().map(str::to_string).collect();
    let skip = usize::from(options.time_column);
    if header.len() <= skip {
        return Err(fail("header has no series columns".into()));
    }
    let labels: Vec<String> = header[skip..].to_vec();
    for (j, label) in labels.iter().enumerate() {
        if label.is_empty() {
            return Err(fail(format!("column {} has an empty header", j + skip + 1)));
        }
        if labels[..j].contains(label) {
            return Err(fail(format!("duplicate column label `{label}`")));
        }
    }

    let p = labels.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); p];
    let mut index = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        let line = record.position().map_or(0, |pos| pos.line());
        if record.len() != header.len() {
            return Err(fail(format!(
                "row {line} has {} fields, the header has {}",
                record.len(),
                header.len()
            )));
        }
        if options.time_column {
            index.push(record[0].to_string());
        }
        for (j, cell) in record.iter().skip(skip).enumerate() {
            if MISSING.contains(&cell.to_ascii_lowercase().as_str()) {
                return Err(fail(format!("missing value at row {line}, column `{}`", labels[j])));
            }
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => columns[j].push(v),
                _ => return Err(fail(format!("non-numeric value `{cell}` at row {line}, column `{}`", labels[j]))),
            }
        }
    }
    if columns[0].len() < 2 {
        return Err(fail("need at least two data rows".into()));
    }
    let panel = Panel::from_columns(labels, &columns).map_err(|e| fail(e.to_string()))?;
    if options.time_column {
        panel.with_time_index(index).map_err(|e| fail(e.to_string()))
    } else {
        Ok(panel)
    }
}
