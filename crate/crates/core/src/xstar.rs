//! Robinson's X* diagnostic for non-cointegration.
//!
//! With pooled memory `d~ = sum a_i d_i`, the weighted band averages
//!
//! ```text
//! G(d) = (1/m) sum_j Re I(lambda_j) lambda_j^{2d}
//! H(d) = (1/m) sum_j v_j Re I(lambda_j) lambda_j^{2d},   v_j = log j - mean_i log i
//! ```
//!
//! give `s* = tr(G^{-1} H)` and `X* = m s*^2 / (p^2 tr(R A R A) - p)`, where
//! `R = D^{-1/2} G D^{-1/2}` is the correlation form of `G` (unit diagonal,
//! `D = diag G`) and `A = diag(a)`. The correlation form makes X* invariant
//! to the units of each series; note the variance term vanishes when `R = I`
//! and `A = I/p`, so exactly uncorrelated inputs with equal weights are a
//! degenerate case of the statistic. Under non-cointegration with
//! stationary inputs X* is asymptotically chi-square with one degree of
//! freedom.

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Serialize, Serializer};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::memory::{check_weights, equal_weights, local_whittle_from_periodogram, Bounds, MemoryEstimate};
use crate::panel::Panel;
use crate::spectral::{cross_periodogram, PeriodogramSet};

/// Smallest admissible eigenvalue of the correlation form of `G`.
const SINGULAR_EIGEN: f64 = 1e-12;
/// Smallest admissible X* denominator.
const DENOMINATOR_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct XStarResult {
    pub x_star: f64,
    pub s_star: f64,
    pub d_tilde: f64,
    pub d_hats: Vec<f64>,
    #[serde(serialize_with = "rows")]
    pub g: DMatrix<f64>,
    #[serde(serialize_with = "rows")]
    pub h: DMatrix<f64>,
    #[serde(serialize_with = "rows")]
    pub r: DMatrix<f64>,
    /// Diagonal of `G`.
    pub d_diag: Vec<f64>,
    pub weights: Vec<f64>,
    pub m: usize,
    pub p_value: f64,
    /// Largest absolute imaginary entry of the band-averaged cross-periodogram
    /// that was dropped when taking real parts.
    pub discarded_imag: f64,
    pub warnings: Vec<String>,
}

impl XStarResult {
    /// `X* > chi2_1(1 - alpha)`.
    pub fn rejects(&self, alpha: f64) -> Result<bool> {
        Ok(self.x_star > chi2_critical(alpha)?)
    }
}

fn rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    rows.serialize(s)
}

/// Upper `alpha` quantile of chi-square(1), e.g. 3.841 at 5%.
pub fn chi2_critical(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("level must lie in (0, 1), got {alpha}")));
    }
    Ok(ChiSquared::new(1.0).expect("valid dof").inverse_cdf(1.0 - alpha))
}

/// Upper-tail chi-square(1) probability.
pub fn chi2_p_value(x: f64) -> f64 {
    ChiSquared::new(1.0).expect("valid dof").sf(x.max(0.0))
}

/// `v_j = log j - (1/m) sum_i log i`.
pub fn v_weights(m: usize) -> Vec<f64> {
    let logs: Vec<f64> = (1..=m).map(|j| (j as f64).ln()).collect();
    let mean = logs.iter().sum::<f64>() / m as f64;
    logs.into_iter().map(|l| l - mean).collect()
}

struct Averages {
    g: DMatrix<f64>,
    h: DMatrix<f64>,
    imag: f64,
}

fn averages(pgrams: &PeriodogramSet, d_tilde: f64) -> Result<Averages> {
    let m = pgrams.bandwidth();
    if m == 0 {
        return Err(Error::InvalidInput("empty periodogram set".into()));
    }
    let p = pgrams.dim();
    let v = v_weights(m);
    let mut g = DMatrix::zeros(p, p);
    let mut h = DMatrix::zeros(p, p);
    let mut im = DMatrix::<f64>::zeros(p, p);
    for ((lam, mat), vj) in pgrams.freqs().iter().zip(pgrams.matrices()).zip(&v) {
        let w = lam.powf(2.0 * d_tilde);
        for b in 0..p {
            for a in 0..p {
                let z = mat[(a, b)];
                g[(a, b)] += w * z.re;
                h[(a, b)] += vj * w * z.re;
                im[(a, b)] += w * z.im;
            }
        }
    }
    let scale = 1.0 / m as f64;
    let imag = im.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) * scale;
    Ok(Averages { g: g * scale, h: h * scale, imag })
}

/// Real parts of the weighted averages `G(d~)` and `H(d~)`.
pub fn gh_matrices(pgrams: &PeriodogramSet, d_tilde: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let a = averages(pgrams, d_tilde)?;
    Ok((a.g, a.h))
}

/// X* from a periodogram set and memory estimates of its columns.
pub fn xstar_from_periodogram(
    pgrams: &PeriodogramSet,
    estimates: &[MemoryEstimate],
    weights: &[f64],
    labels: &[String],
) -> Result<XStarResult> {
    let p = pgrams.dim();
    if p < 2 {
        return Err(Error::InvalidInput("X* needs at least two series (the denominator vanishes for p = 1)".into()));
    }
    if estimates.len() != p || labels.len() != p {
        return Err(Error::InvalidInput("estimates/labels do not match the periodogram dimension".into()));
    }
    check_weights(weights, p)?;
    let d_hats: Vec<f64> = estimates.iter().map(|e| e.d_hat).collect();
    let d_tilde: f64 = d_hats.iter().zip(weights).map(|(d, a)| d * a).sum();

    let mut warnings = Vec::new();
    for (e, label) in estimates.iter().zip(labels) {
        if e.d_hat >= 0.5 {
            warnings.push(format!(
                "`{label}` has d_hat = {:.4} >= 0.5; the X* null assumes stationary series",
                e.d_hat
            ));
        }
        if e.at_boundary {
            warnings.push(format!("`{label}` memory estimate {:.4} lies on the search boundary", e.d_hat));
        }
    }

    let Averages { g, h, imag } = averages(pgrams, d_tilde)?;
    let d_diag: Vec<f64> = g.diagonal().iter().copied().collect();
    if d_diag.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::SingularG);
    }
    let inv_sqrt: Vec<f64> = d_diag.iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut r = DMatrix::from_fn(p, p, |a, b| g[(a, b)] * inv_sqrt[a] * inv_sqrt[b]);
    let k = DMatrix::from_fn(p, p, |a, b| h[(a, b)] * inv_sqrt[a] * inv_sqrt[b]);
    for a in 0..p {
        r[(a, a)] = 1.0;
    }
    let min_eig = SymmetricEigen::new(r.clone()).eigenvalues.min();
    if !(min_eig > SINGULAR_EIGEN) {
        return Err(Error::SingularG);
    }
    let chol = Cholesky::new(r.clone()).ok_or(Error::SingularG)?;
    // tr(G^-1 H) = tr(R^-1 K) with K = D^{-1/2} H D^{-1/2}
    let s_star = chol.solve(&k).trace();

    let mut tr_rara = 0.0;
    for a in 0..p {
        for b in 0..p {
            tr_rara += weights[a] * weights[b] * r[(a, b)] * r[(a, b)];
        }
    }
    let pf = p as f64;
    let denominator = pf * pf * tr_rara - pf;
    if !(denominator >= DENOMINATOR_FLOOR) {
        return Err(Error::DegenerateDenominator(denominator));
    }
    let m = pgrams.bandwidth();
    let x_star = m as f64 * s_star * s_star / denominator;
    Ok(XStarResult {
        x_star,
        s_star,
        d_tilde,
        d_hats,
        g,
        h,
        r,
        d_diag,
        weights: weights.to_vec(),
        m,
        p_value: chi2_p_value(x_star),
        discarded_imag: imag,
        warnings,
    })
}

/// X* for the columns of `panel` at bandwidth `m`. Each column's memory is
/// estimated by local Whittle on the same band; `weights` default to `1/p`.
pub fn xstar(panel: &Panel, m: usize, weights: Option<&[f64]>) -> Result<XStarResult> {
    let p = panel.nvars();
    if p < 2 {
        return Err(Error::InvalidInput("X* needs at least two series (the denominator vanishes for p = 1)".into()));
    }
    let pgrams = cross_periodogram(panel, m, true)?;
    let estimates = column_estimates(&pgrams)?;
    let w = match weights {
        Some(w) => w.to_vec(),
        None => equal_weights(p),
    };
    xstar_from_periodogram(&pgrams, &estimates, &w, panel.labels())
}

/// Local Whittle estimate for every column of a periodogram set.
pub fn column_estimates(pgrams: &PeriodogramSet) -> Result<Vec<MemoryEstimate>> {
    (0..pgrams.dim())
        .map(|i| local_whittle_from_periodogram(pgrams.freqs(), &pgrams.diagonal(i), Bounds::local_whittle()))
        .collect()
}
