//! Type-II fractional difference and cumulation operators.
//!
//! `(1 - L)^d` is expanded as `sum_k pi_k(d) L^k` with `pi_0 = 1` and
//! `pi_k = pi_{k-1} (k - 1 - d) / k`. Type II means the expansion is
//! truncated at the start of the sample: pre-sample values are zero, so
//! filtering with `d` and then `-d` returns the input exactly.

use std::sync::Arc;

use nalgebra::DMatrix;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Lengths up to this use direct summation instead of FFT convolution.
const DIRECT_MAX_LEN: usize = 96;

/// The first `n` expansion coefficients of `(1 - L)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FracCoeffs {
    d: f64,
    coeffs: Vec<f64>,
}

impl FracCoeffs {
    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }
}

/// Coefficients of `(1 - L)^d`. Pass `-d` for the cumulation `(1 - L)^{-d}`.
pub fn frac_coeffs(d: f64, n: usize) -> Result<FracCoeffs> {
    if !d.is_finite() {
        return Err(Error::InvalidInput(format!("filter order must be finite, got {d}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("need at least one coefficient".into()));
    }
    Ok(FracCoeffs { d, coeffs: coeffs_unchecked(d, n) })
}

pub(crate) fn coeffs_unchecked(d: f64, n: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(n);
    let mut prev = 1.0;
    c.push(prev);
    for k in 1..n {
        let kf = k as f64;
        prev *= (kf - 1.0 - d) / kf;
        c.push(prev);
    }
    c
}

/// Derivatives `d pi_k / d d`, from differentiating the recursion.
pub(crate) fn coeffs_derivative(d: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut pi = 1.0;
    let mut dpi = 0.0;
    out.push(dpi);
    for k in 1..n {
        let kf = k as f64;
        dpi = dpi * (kf - 1.0 - d) / kf - pi / kf;
        pi *= (kf - 1.0 - d) / kf;
        out.push(dpi);
    }
    out
}

/// A truncated causal filter `y_t = sum_{k<t} c_k x_{t-k}` prepared for
/// series up to a fixed length.
///
/// Short series are filtered by direct summation; longer ones by zero-padded
/// FFT convolution, with two real series packed into one complex transform.
#[derive(Clone)]
pub struct FracFilter {
    len: usize,
    kind: FilterKind,
}

#[derive(Clone)]
enum FilterKind {
    Direct(Vec<f64>),
    Fft {
        forward: Arc<dyn Fft<f64>>,
        inverse: Arc<dyn Fft<f64>>,
        kernel: Vec<Complex<f64>>,
    },
}

impl std::fmt::Debug for FracFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            FilterKind::Direct(_) => "direct",
            FilterKind::Fft { .. } => "fft",
        };
        f.debug_struct("FracFilter").field("len", &self.len).field("kind", &kind).finish()
    }
}

impl FracFilter {
    /// Filter `(1 - L)^d` for series of length `len`.
    pub fn new(d: f64, len: usize) -> Result<Self> {
        Ok(Self::from_coeffs(frac_coeffs(d, len)?.into_vec()))
    }

    pub(crate) fn from_coeffs(coeffs: Vec<f64>) -> Self {
        let len = coeffs.len();
        if len <= DIRECT_MAX_LEN {
            return FracFilter { len, kind: FilterKind::Direct(coeffs) };
        }
        let size = (2 * len - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let mut kernel = vec![Complex::new(0.0, 0.0); size];
        for (k, &c) in kernel.iter_mut().zip(&coeffs) {
            k.re = c;
        }
        forward.process(&mut kernel);
        let scale = 1.0 / size as f64;
        for k in &mut kernel {
            *k *= scale;
        }
        FracFilter { len, kind: FilterKind::Fft { forward, inverse, kernel } }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Filters one series of length at most `len()`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert!(x.len() <= self.len, "series longer than the prepared filter");
        match &self.kind {
            FilterKind::Direct(c) => direct(c, x),
            FilterKind::Fft { .. } => {
                let mut out = vec![0.0; x.len()];
                self.fft_pair(x, None, &mut out, None);
                out
            }
        }
    }

    /// Filters every column of `m`.
    pub fn apply_columns(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let (t, p) = m.shape();
        assert!(t <= self.len, "series longer than the prepared filter");
        let src = m.as_slice();
        let mut out = DMatrix::zeros(t, p);
        let dst = out.as_mut_slice();
        match &self.kind {
            FilterKind::Direct(c) => {
                for j in 0..p {
                    let y = direct(c, &src[j * t..(j + 1) * t]);
                    dst[j * t..(j + 1) * t].copy_from_slice(&y);
                }
            }
            FilterKind::Fft { .. } => {
                let mut j = 0;
                while j < p {
                    let (head, tail) = dst[j * t..].split_at_mut(t);
                    if j + 1 < p {
                        self.fft_pair(
                            &src[j * t..(j + 1) * t],
                            Some(&src[(j + 1) * t..(j + 2) * t]),
                            head,
                            Some(&mut tail[..t]),
                        );
                        j += 2;
                    } else {
                        self.fft_pair(&src[j * t..(j + 1) * t], None, head, None);
                        j += 1;
                    }
                }
            }
        }
        out
    }

    fn fft_pair(&self, a: &[f64], b: Option<&[f64]>, out_a: &mut [f64], out_b: Option<&mut [f64]>) {
        let FilterKind::Fft { forward, inverse, kernel } = &self.kind else {
            unreachable!()
        };
        let mut buf = vec![Complex::new(0.0, 0.0); kernel.len()];
        for (z, &v) in buf.iter_mut().zip(a) {
            z.re = v;
        }
        if let Some(b) = b {
            for (z, &v) in buf.iter_mut().zip(b) {
                z.im = v;
            }
        }
        forward.process(&mut buf);
        for (z, k) in buf.iter_mut().zip(kernel) {
            *z *= *k;
        }
        inverse.process(&mut buf);
        for (o, z) in out_a.iter_mut().zip(&buf) {
            *o = z.re;
        }
        if let Some(out_b) = out_b {
            for (o, z) in out_b.iter_mut().zip(&buf) {
                *o = z.im;
            }
        }
    }
}

fn direct(c: &[f64], x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|t| c[..=t].iter().zip(x[..=t].iter().rev()).map(|(a, b)| a * b).sum())
        .collect()
}

/// Type-II fractional filter: `d > 0` differences, `d < 0` cumulates.
pub fn frac_filter(x: &[f64], d: f64) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::InvalidInput("cannot filter an empty series".into()));
    }
    Ok(FracFilter::new(d, x.len())?.apply(x))
}
