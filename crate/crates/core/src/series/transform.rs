use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::panel::Panel;

/// First differences of natural logs (growth rates). Drops the first row.
pub fn log_and_diff(panel: &Panel) -> Result<Panel> {
    let logged = log_levels(panel)?;
    let (t, p) = logged.values().shape();
    if t < 3 {
        return Err(Error::InvalidInput("need at least 3 rows to difference".into()));
    }
    let v = logged.values();
    let diff = DMatrix::from_fn(t - 1, p, |i, j| v[(i + 1, j)] - v[(i, j)]);
    panel.replace_values(diff)
}

/// Natural logs of every entry.
pub fn log_levels(panel: &Panel) -> Result<Panel> {
    let v = panel.values();
    for j in 0..panel.nvars() {
        if let Some(i) = panel.column(j).iter().position(|&x| x <= 0.0) {
            return Err(Error::InvalidInput(format!(
                "cannot take the log of non-positive value {} at row {}, column `{}`",
                v[(i, j)],
                i + 1,
                panel.labels()[j]
            )));
        }
    }
    panel.replace_values(v.map(f64::ln))
}

/// Cross-sectional sample standard deviation (divisor p - 1) of every row.
///
/// No transform is applied; pass log levels for income dispersion.
pub fn sigma_dispersion(panel: &Panel) -> Result<Vec<f64>> {
    let p = panel.nvars();
    if p < 2 {
        return Err(Error::InvalidInput("dispersion needs at least two columns".into()));
    }
    let v = panel.values();
    Ok((0..panel.nobs())
        .map(|i| {
            let row = v.row(i);
            let mean = row.sum() / p as f64;
            let ss: f64 = row.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (p - 1) as f64).sqrt()
        })
        .collect())
}
