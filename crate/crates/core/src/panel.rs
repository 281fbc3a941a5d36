//! The `Panel` container: a T x p block of observations with column labels.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// T x p matrix of observations (rows are periods, columns are series).
///
/// Construction validates that every entry is finite, that T >= 2 and
/// p >= 1, and that labels are unique and non-empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Panel {
    #[serde(skip)]
    values: DMatrix<f64>,
    labels: Vec<String>,
    time_index: Option<Vec<String>>,
}

impl Panel {
    pub fn new(values: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let (t, p) = values.shape();
        if t < 2 {
            return Err(Error::InvalidInput(format!("panel needs T >= 2 rows, got {t}")));
        }
        if p < 1 {
            return Err(Error::InvalidInput("panel needs at least one column".into()));
        }
        if labels.len() != p {
            return Err(Error::InvalidInput(format!(
                "{} labels for {p} columns",
                labels.len()
            )));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if label.trim().is_empty() {
                return Err(Error::InvalidInput("empty column label".into()));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate column label `{label}`")));
            }
        }
        for j in 0..p {
            for i in 0..t {
                if !values[(i, j)].is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "non-finite value at row {}, column `{}`",
                        i + 1,
                        labels[j]
                    )));
                }
            }
        }
        Ok(Panel { values, labels, time_index: None })
    }

    /// Builds a panel from equal-length columns.
    pub fn from_columns(labels: Vec<String>, columns: &[Vec<f64>]) -> Result<Self> {
        let t = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != t) {
            return Err(Error::InvalidInput("columns have different lengths".into()));
        }
        let data: Vec<f64> = columns.iter().flatten().copied().collect();
        Panel::new(DMatrix::from_vec(t, columns.len(), data), labels)
    }

    /// Labels columns `x1`, `x2`, ...
    pub fn from_unlabeled(values: DMatrix<f64>) -> Result<Self> {
        let labels = (1..=values.ncols()).map(|j| format!("x{j}")).collect();
        Panel::new(values, labels)
    }

    pub fn with_time_index(mut self, index: Vec<String>) -> Result<Self> {
        if index.len() != self.nobs() {
            return Err(Error::InvalidInput(format!(
                "time index has {} entries for {} rows",
                index.len(),
                self.nobs()
            )));
        }
        self.time_index = Some(index);
        Ok(self)
    }

    pub fn nobs(&self) -> usize {
        self.values.nrows()
    }

    pub fn nvars(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn time_index(&self) -> Option<&[String]> {
        self.time_index.as_deref()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let t = self.nobs();
        &self.values.as_slice()[j * t..(j + 1) * t]
    }

    pub fn column_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Sub-panel with the given columns, in the given order.
    pub fn select(&self, columns: &[usize]) -> Result<Panel> {
        if columns.is_empty() {
            return Err(Error::InvalidInput("empty column selection".into()));
        }
        if let Some(&bad) = columns.iter().find(|&&j| j >= self.nvars()) {
            return Err(Error::InvalidInput(format!("column {bad} out of range")));
        }
        let values = self.values.select_columns(columns);
        let labels = columns.iter().map(|&j| self.labels[j].clone()).collect();
        let panel = Panel::new(values, labels)?;
        match &self.time_index {
            Some(idx) => panel.with_time_index(idx.clone()),
            None => Ok(panel),
        }
    }

    /// Same labels and index, new values of identical shape or with rows
    /// dropped from the front.
    pub(crate) fn replace_values(&self, values: DMatrix<f64>) -> Result<Panel> {
        let dropped = self.nobs().saturating_sub(values.nrows());
        let panel = Panel::new(values, self.labels.clone())?;
        match &self.time_index {
            Some(idx) => panel.with_time_index(idx[dropped..].to_vec()),
            None => Ok(panel),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn rejects_duplicate_and_empty_labels() {
        let m = DMatrix::zeros(3, 2);
        assert!(Panel::new(m.clone(), labels(&["mad", "mad"])).is_err());
        assert!(Panel::new(m.clone(), labels(&["mad", " "])).is_err());
        assert!(Panel::new(m, labels(&["mad", "cat"])).is_ok());
    }

    #[test]
    fn rejects_non_finite_and_short_panels() {
        let mut m = DMatrix::zeros(3, 1);
        m[(1, 0)] = f64::NAN;
        assert!(Panel::new(m, labels(&["a"])).is_err());
        assert!(Panel::new(DMatrix::zeros(1, 1), labels(&["a"])).is_err());
    }

    #[test]
    fn column_and_select() {
        let p = Panel::from_columns(labels(&["a", "b", "c"]), &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]])
            .unwrap();
        assert_eq!(p.column(1), &[3.0, 4.0]);
        let s = p.select(&[2, 0]).unwrap();
        assert_eq!(s.labels(), &["c".to_string(), "a".to_string()]);
        assert_eq!(s.column(0), &[5.0, 6.0]);
        assert_eq!(p.column_index("b"), Some(1));
    }
}
