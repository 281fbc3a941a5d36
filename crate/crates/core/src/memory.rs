//! Semiparametric memory estimation: local Whittle, exact local Whittle and
//! the pooled estimate used by the X* statistic.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{minimize, ScalarObjective};
use crate::panel::Panel;
use crate::series::{coeffs_derivative, coeffs_unchecked, FracFilter};
use crate::spectral::{check_bandwidth, dft_band, fourier_frequencies, periodogram};

/// Absolute tolerance on `d` for the golden-section stage.
pub const D_TOLERANCE: f64 = 1e-6;

/// Closed search interval for `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!("invalid search interval [{lo}, {hi}]")));
        }
        Ok(Bounds { lo, hi })
    }

    /// `[-0.5, 1)`: the consistency range of the local Whittle estimator.
    pub fn local_whittle() -> Self {
        Bounds { lo: -0.5, hi: 1.0 }
    }

    pub fn exact_local_whittle() -> Self {
        Bounds { lo: -0.5, hi: 2.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    LocalWhittle,
    ExactLocalWhittle,
}

/// How the level of the series is removed before exact local Whittle
/// differencing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanHandling {
    None,
    #[default]
    Demean,
    FirstObs,
}

/// Estimator choice for [`panel_memory`], each with its default bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimator {
    LocalWhittle,
    ExactLocalWhittle(MeanHandling),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryEstimate {
    pub d_hat: f64,
    pub m: usize,
    /// `1 / (2 sqrt(m))`.
    pub std_err: f64,
    pub method: Method,
    pub bounds: Bounds,
    /// Set when the minimiser sits on (within 1e-5 of) an end of `bounds`.
    pub at_boundary: bool,
}

fn estimate(method: Method, m: usize, bounds: Bounds, x: f64) -> MemoryEstimate {
    let at_boundary = (x - bounds.lo).abs() < 1e-5 || (bounds.hi - x).abs() < 1e-5;
    MemoryEstimate {
        d_hat: x,
        m,
        std_err: 1.0 / (2.0 * (m as f64).sqrt()),
        method,
        bounds,
        at_boundary,
    }
}

fn is_constant(x: &[f64]) -> bool {
    let scale = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let first = x[0];
    x.iter().all(|v| (v - first).abs() <= 1e-12 * scale)
}

/// Local Whittle objective `R(d) = log(mean_j lambda_j^{2d} I_j) - 2 d mean_j log lambda_j`.
pub struct LocalWhittleObjective {
    log_freqs: Vec<f64>,
    mean_log: f64,
    pgram: Vec<f64>,
}

impl LocalWhittleObjective {
    pub fn new(freqs: &[f64], pgram: &[f64]) -> Self {
        let log_freqs: Vec<f64> = freqs.iter().map(|f| f.ln()).collect();
        let mean_log = log_freqs.iter().sum::<f64>() / log_freqs.len() as f64;
        LocalWhittleObjective { log_freqs, mean_log, pgram: pgram.to_vec() }
    }

    pub fn eval(&self, d: f64) -> f64 {
        let m = self.pgram.len() as f64;
        let g: f64 = self
            .log_freqs
            .iter()
            .zip(&self.pgram)
            .map(|(l, i)| (2.0 * d * l).exp() * i)
            .sum::<f64>()
            / m;
        g.ln() - 2.0 * d * self.mean_log
    }
}

impl ScalarObjective for LocalWhittleObjective {
    fn value(&self, d: f64) -> f64 {
        self.eval(d)
    }

    fn slope(&self, d: f64) -> f64 {
        self.log_freqs
            .iter()
            .zip(&self.pgram)
            .map(|(l, i)| (l - self.mean_log) * (2.0 * d * l).exp() * i)
            .sum()
    }
}

/// Local Whittle estimate from an already computed periodogram band.
pub fn local_whittle_from_periodogram(freqs: &[f64], pgram: &[f64], bounds: Bounds) -> Result<MemoryEstimate> {
    if freqs.is_empty() || freqs.len() != pgram.len() {
        return Err(Error::InvalidInput("periodogram and frequencies differ in length".into()));
    }
    if pgram.iter().all(|&i| i == 0.0) {
        return Err(Error::ZeroPeriodogram);
    }
    let obj = LocalWhittleObjective::new(freqs, pgram);
    let best = minimize(&obj, bounds.lo, bounds.hi, D_TOLERANCE);
    Ok(estimate(Method::LocalWhittle, freqs.len(), bounds, best.x))
}

/// Local Whittle estimate of `d` from the first `m` Fourier frequencies of
/// the demeaned series.
pub fn local_whittle(x: &[f64], m: usize, bounds: Bounds) -> Result<MemoryEstimate> {
    check_bandwidth(x.len(), m)?;
    if is_constant(x) {
        return Err(Error::ZeroPeriodogram);
    }
    let freqs = fourier_frequencies(x.len(), m)?;
    let pgram = periodogram(x, m, true)?;
    local_whittle_from_periodogram(&freqs, &pgram, bounds)
}

/// Exact local Whittle objective: the periodogram is taken of the type-II
/// fractional difference `(1 - L)^d x` at every trial `d`.
pub struct ExactLocalWhittleObjective {
    x: Vec<f64>,
    m: usize,
    mean_log: f64,
}

impl ExactLocalWhittleObjective {
    pub fn new(x: &[f64], m: usize, mean_handling: MeanHandling) -> Result<Self> {
        let freqs = fourier_frequencies(x.len(), m)?;
        let mean_log = freqs.iter().map(|f| f.ln()).sum::<f64>() / m as f64;
        let x = match mean_handling {
            MeanHandling::None => x.to_vec(),
            MeanHandling::Demean => {
                let mean = x.iter().sum::<f64>() / x.len() as f64;
                x.iter().map(|v| v - mean).collect()
            }
            MeanHandling::FirstObs => x.iter().map(|v| v - x[0]).collect(),
        };
        Ok(ExactLocalWhittleObjective { x, m, mean_log })
    }

    fn g(&self, d: f64) -> f64 {
        let y = FracFilter::from_coeffs(coeffs_unchecked(d, self.x.len())).apply(&self.x);
        let norm = 2.0 * std::f64::consts::PI * self.x.len() as f64;
        dft_band(&y, self.m).iter().map(|w| w.norm_sqr()).sum::<f64>() / (norm * self.m as f64)
    }

    pub fn eval(&self, d: f64) -> f64 {
        self.g(d).ln() - 2.0 * d * self.mean_log
    }
}

impl ScalarObjective for ExactLocalWhittleObjective {
    fn value(&self, d: f64) -> f64 {
        self.eval(d)
    }

    fn slope(&self, d: f64) -> f64 {
        let n = self.x.len();
        let y = FracFilter::from_coeffs(coeffs_unchecked(d, n)).apply(&self.x);
        let dy = FracFilter::from_coeffs(coeffs_derivative(d, n)).apply(&self.x);
        let w = dft_band(&y, self.m);
        let dw = dft_band(&dy, self.m);
        // proportional to G'(d) - 2 mean(log lambda) G(d)
        w.iter()
            .zip(&dw)
            .map(|(a, b)| 2.0 * (a * b.conj()).re - 2.0 * self.mean_log * a.norm_sqr())
            .sum()
    }
}

/// Exact local Whittle estimate, valid for stationary and nonstationary `d`.
pub fn exact_local_whittle(x: &[f64], m: usize, bounds: Bounds, mean_handling: MeanHandling) -> Result<MemoryEstimate> {
    check_bandwidth(x.len(), m)?;
    let obj = ExactLocalWhittleObjective::new(x, m, mean_handling)?;
    if obj.x.iter().all(|&v| v == 0.0) || (mean_handling == MeanHandling::Demean && is_constant(x)) {
        return Err(Error::ZeroPeriodogram);
    }
    let best = minimize(&obj, bounds.lo, bounds.hi, D_TOLERANCE);
    Ok(estimate(Method::ExactLocalWhittle, m, bounds, best.x))
}

/// Column-wise memory estimates, in column order.
pub fn panel_memory(panel: &Panel, m: usize, estimator: Estimator) -> Result<Vec<MemoryEstimate>> {
    (0..panel.nvars())
        .into_par_iter()
        .map(|j| {
            let x = panel.column(j);
            match estimator {
                Estimator::LocalWhittle => local_whittle(x, m, Bounds::local_whittle()),
                Estimator::ExactLocalWhittle(mh) => exact_local_whittle(x, m, Bounds::exact_local_whittle(), mh),
            }
        })
        .collect()
}

/// Equal weights `1/p`.
pub fn equal_weights(p: usize) -> Vec<f64> {
    vec![1.0 / p as f64; p]
}

pub(crate) fn check_weights(weights: &[f64], p: usize) -> Result<()> {
    if weights.len() != p {
        return Err(Error::InvalidInput(format!("{} weights for {p} series", weights.len())));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidInput("non-finite weight".into()));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

/// Weighted pooled memory `sum_i a_i d_i` with `sum_i a_i = 1`.
pub fn pooled_memory(estimates: &[f64], weights: &[f64]) -> Result<f64> {
    check_weights(weights, estimates.len())?;
    Ok(estimates.iter().zip(weights).map(|(d, a)| d * a).sum())
}
