//! Fourier frequencies and (cross-)periodograms.
//!
//! The DFT is `w(lambda_j) = sum_{t=1}^T y_t exp(-i lambda_j t)` with
//! `lambda_j = 2 pi j / T`, and the periodogram matrix is
//! `I(lambda_j) = w w^H / (2 pi T)`. Transforms are evaluated by direct
//! summation against an exact twiddle table indexed by `j t mod T`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::panel::Panel;

/// Checks `1 <= m < T/2`.
pub fn check_bandwidth(t: usize, m: usize) -> Result<()> {
    if m < 1 || 2 * m >= t {
        return Err(Error::Bandwidth { m, t });
    }
    Ok(())
}

/// `lambda_j = 2 pi j / T` for `j = 1..=m`.
pub fn fourier_frequencies(t: usize, m: usize) -> Result<Vec<f64>> {
    check_bandwidth(t, m)?;
    Ok((1..=m).map(|j| 2.0 * PI * j as f64 / t as f64).collect())
}

fn twiddles(t: usize) -> Vec<Complex64> {
    (0..t)
        .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / t as f64))
        .collect()
}

fn dft_at(x: &[f64], j: usize, tw: &[Complex64]) -> Complex64 {
    let t = x.len();
    let mut idx = 0usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for &v in x {
        idx += j;
        if idx >= t {
            idx -= t;
        }
        acc += tw[idx] * v;
    }
    acc
}

fn demeaned(x: &[f64]) -> Vec<f64> {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - mean).collect()
}

/// DFT ordinates `w(lambda_1) .. w(lambda_m)` without any mean correction.
pub(crate) fn dft_band(x: &[f64], m: usize) -> Vec<Complex64> {
    let tw = twiddles(x.len());
    (1..=m).map(|j| dft_at(x, j, &tw)).collect()
}

/// Univariate periodogram over the first `m` Fourier frequencies.
pub fn periodogram(x: &[f64], m: usize, demean: bool) -> Result<Vec<f64>> {
    check_bandwidth(x.len(), m)?;
    let x = if demean { demeaned(x) } else { x.to_vec() };
    let norm = 2.0 * PI * x.len() as f64;
    Ok(dft_band(&x, m).into_iter().map(|w| w.norm_sqr() / norm).collect())
}

/// Periodogram at every non-zero Fourier frequency `j = 1..T-1`.
pub fn periodogram_full(x: &[f64], demean: bool) -> Vec<f64> {
    let x = if demean { demeaned(x) } else { x.to_vec() };
    let t = x.len();
    let tw = twiddles(t);
    let norm = 2.0 * PI * t as f64;
    (1..t).map(|j| dft_at(&x, j, &tw).norm_sqr() / norm).collect()
}

/// Cross-periodogram matrices at `lambda_1..lambda_m`.
#[derive(Debug, Clone)]
pub struct PeriodogramSet {
    nobs: usize,
    freqs: Vec<f64>,
    matrices: Vec<DMatrix<Complex64>>,
    demeaned: bool,
}

impl PeriodogramSet {
    pub fn nobs(&self) -> usize {
        self.nobs
    }

    pub fn bandwidth(&self) -> usize {
        self.freqs.len()
    }

    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn matrices(&self) -> &[DMatrix<Complex64>] {
        &self.matrices
    }

    pub fn demeaned(&self) -> bool {
        self.demeaned
    }

    /// Univariate periodogram of column `i`.
    pub fn diagonal(&self, i: usize) -> Vec<f64> {
        self.matrices.iter().map(|m| m[(i, i)].re).collect()
    }

    /// Periodogram set of the sub-vector with the given columns.
    pub fn select(&self, columns: &[usize]) -> PeriodogramSet {
        let matrices = self
            .matrices
            .iter()
            .map(|m| DMatrix::from_fn(columns.len(), columns.len(), |a, b| m[(columns[a], columns[b])]))
            .collect();
        PeriodogramSet { nobs: self.nobs, freqs: self.freqs.clone(), matrices, demeaned: self.demeaned }
    }
}

/// `I_y(lambda_j) = w(lambda_j) w(lambda_j)^H / (2 pi T)` for `j = 1..=m`,
/// after column demeaning when `demean` is set.
pub fn cross_periodogram(panel: &Panel, m: usize, demean: bool) -> Result<PeriodogramSet> {
    let t = panel.nobs();
    if t < 4 {
        return Err(Error::InvalidInput(format!("periodogram needs T >= 4, got {t}")));
    }
    let freqs = fourier_frequencies(t, m)?;
    let p = panel.nvars();
    let tw = twiddles(t);
    let columns: Vec<Vec<f64>> = (0..p)
        .map(|j| if demean { demeaned(panel.column(j)) } else { panel.column(j).to_vec() })
        .collect();
    let norm = 2.0 * PI * t as f64;
    let matrices = (1..=m)
        .map(|j| {
            let w: Vec<Complex64> = columns.iter().map(|c| dft_at(c, j, &tw)).collect();
            DMatrix::from_fn(p, p, |a, b| {
                if a == b {
                    Complex64::new(w[a].norm_sqr() / norm, 0.0)
                } else {
                    w[a] * w[b].conj() / norm
                }
            })
        })
        .collect();
    Ok(PeriodogramSet { nobs: t, freqs, matrices, demeaned: demean })
}
