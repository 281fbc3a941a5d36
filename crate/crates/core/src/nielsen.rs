//! Nielsen's variance-ratio cointegration rank test.
//!
//! After removing deterministic terms from the observed series `Z_t`, the
//! type-II fractional cumulation `Z~_t = (1 - L)^{-d1} Z_t` gives
//! `A_T = sum_t Z_t Z_t'` and `B_T = sum_t Z~_t Z~_t'`. With
//! `theta_1 <= ... <= theta_p` the eigenvalues of the pencil
//! `|theta B_T - A_T| = 0`, the statistic for `H0: r = r0` is
//!
//! ```text
//! Lambda_{p,r0}(d1) = T^{2 d1} (theta_1 + ... + theta_{p - r0})
//! ```
//!
//! i.e. the sum of the `p - r0` smallest eigenvalues. Common-trend
//! directions keep `T^{2 d1} theta` bounded while cointegrated directions
//! make it diverge, so large values reject.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::critval::CriticalValueTable;
use crate::error::{Error, Result};
use crate::panel::Panel;
use crate::series::FracFilter;

/// Default filter order `d1`.
pub const DEFAULT_D1: f64 = 0.1;

/// Deterministic terms removed before the statistic is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetCase {
    /// No deterministic terms.
    None,
    /// Non-zero mean.
    Const,
    /// Constant and linear trend.
    Trend,
}

impl DetCase {
    pub const ALL: [DetCase; 3] = [DetCase::None, DetCase::Const, DetCase::Trend];

    pub fn as_str(self) -> &'static str {
        match self {
            DetCase::None => "none",
            DetCase::Const => "const",
            DetCase::Trend => "trend",
        }
    }
}

impl fmt::Display for DetCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DetCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(DetCase::None),
            "const" | "constant" => Ok(DetCase::Const),
            "trend" => Ok(DetCase::Trend),
            other => Err(Error::InvalidInput(format!(
                "unknown deterministic case `{other}` (expected none, const or trend)"
            ))),
        }
    }
}

pub(crate) fn remove_deterministics_matrix(z: &DMatrix<f64>, case: DetCase) -> Result<DMatrix<f64>> {
    let (t, p) = z.shape();
    match case {
        DetCase::None => Ok(z.clone()),
        DetCase::Const => {
            let mut out = z.clone();
            for j in 0..p {
                let mean = z.column(j).sum() / t as f64;
                out.column_mut(j).add_scalar_mut(-mean);
            }
            Ok(out)
        }
        DetCase::Trend => {
            if t <= 2 {
                return Err(Error::InvalidInput(format!("trend removal needs T > 2, got {t}")));
            }
            // OLS on [1, t] via the centred regressor
            let t_mean = (t as f64 + 1.0) / 2.0;
            let centred: Vec<f64> = (1..=t).map(|s| s as f64 - t_mean).collect();
            let sxx: f64 = centred.iter().map(|c| c * c).sum();
            let mut out = z.clone();
            for j in 0..p {
                let col = z.column(j);
                let mean = col.sum() / t as f64;
                let slope = col.iter().zip(&centred).map(|(y, c)| (y - mean) * c).sum::<f64>() / sxx;
                for (i, c) in centred.iter().enumerate() {
                    out[(i, j)] = z[(i, j)] - mean - slope * c;
                }
            }
            Ok(out)
        }
    }
}

/// Column-wise removal of the deterministic terms of `case` (identity,
/// demeaning, or least-squares detrending on `[1, t]`).
pub fn remove_deterministics(panel: &Panel, case: DetCase) -> Result<Panel> {
    let v = remove_deterministics_matrix(panel.values(), case)?;
    panel.replace_values(v)
}

/// Ascending eigenvalues of the symmetric-definite pencil `(A, B)`,
/// computed from `L^{-1} A L^{-T}` with `B = L L^T`.
pub fn generalized_eigenvalues(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Vec<f64>> {
    let p = a.nrows();
    if a.shape() != (p, p) || b.shape() != (p, p) || p == 0 {
        return Err(Error::InvalidInput("pencil matrices must be square and of equal size".into()));
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    if (a - a.transpose()).amax() > 1e-10 * scale {
        return Err(Error::InvalidInput("A is not symmetric".into()));
    }
    let chol = Cholesky::new(b.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let y = l
        .solve_lower_triangular(a)
        .ok_or(Error::NotPositiveDefinite)?;
    let c = l
        .solve_lower_triangular(&y.transpose())
        .ok_or(Error::NotPositiveDefinite)?;
    let c = (&c + c.transpose()) * 0.5;
    let mut eig: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    if eig.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    eig.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    Ok(eig)
}

/// `A = Z'Z` and `B = Z~'Z~` with `Z~` the filtered columns.
pub(crate) fn moment_matrices(z: &DMatrix<f64>, filter: &FracFilter) -> (DMatrix<f64>, DMatrix<f64>) {
    let cumulated = filter.apply_columns(z);
    (z.tr_mul(z), cumulated.tr_mul(&cumulated))
}

/// `T^{2 d1}` times the sum of the `k` smallest eigenvalues.
pub(crate) fn scaled_sum(eigenvalues: &[f64], t: usize, d1: f64, k: usize) -> f64 {
    (t as f64).powf(2.0 * d1) * eigenvalues[..k].iter().sum::<f64>()
}

/// Pencil eigenvalues of a (deterministics-free) data matrix.
pub(crate) fn pencil_eigenvalues(z: &DMatrix<f64>, filter: &FracFilter) -> Result<Vec<f64>> {
    let (a, b) = moment_matrices(z, filter);
    generalized_eigenvalues(&a, &b)
}

/// Pencil eigenvalues of a panel together with what is needed to form
/// `Lambda_{p,r0}` for every `r0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceRatio {
    pub eigenvalues: Vec<f64>,
    pub nobs: usize,
    pub d1: f64,
    pub det_case: DetCase,
}

impl VarianceRatio {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda(&self, r0: usize) -> Result<f64> {
        let p = self.dim();
        if r0 >= p {
            return Err(Error::InvalidInput(format!("candidate rank {r0} must be below p = {p}")));
        }
        Ok(scaled_sum(&self.eigenvalues, self.nobs, self.d1, p - r0))
    }

    /// `Lambda_{p,r0}` for `r0 = 0..p-1`.
    pub fn lambda_by_r0(&self) -> Vec<f64> {
        (0..self.dim()).map(|r0| scaled_sum(&self.eigenvalues, self.nobs, self.d1, self.dim() - r0)).collect()
    }
}

fn check_d1(d1: f64) -> Result<()> {
    if !(d1 > 0.0 && d1.is_finite()) {
        return Err(Error::InvalidInput(format!("d1 must be positive, got {d1}")));
    }
    Ok(())
}

pub fn variance_ratio(panel: &Panel, d1: f64, case: DetCase) -> Result<VarianceRatio> {
    check_d1(d1)?;
    let t = panel.nobs();
    if t < panel.nvars() {
        return Err(Error::NotPositiveDefinite);
    }
    let z = remove_deterministics_matrix(panel.values(), case)?;
    let filter = FracFilter::new(-d1, t)?;
    let eigenvalues = pencil_eigenvalues(&z, &filter)?;
    Ok(VarianceRatio { eigenvalues, nobs: t, d1, det_case: case })
}

/// `Lambda_{p,r0}(d1)` for one candidate rank.
pub fn nielsen_lambda(panel: &Panel, r0: usize, d1: f64, case: DetCase) -> Result<f64> {
    if r0 >= panel.nvars() {
        return Err(Error::InvalidInput(format!("candidate rank {r0} must be below p = {}", panel.nvars())));
    }
    variance_ratio(panel, d1, case)?.lambda(r0)
}

#[derive(Debug, Clone, Serialize)]
pub struct NielsenResult {
    pub eigenvalues: Vec<f64>,
    pub lambda_by_r0: Vec<f64>,
    pub d1: f64,
    pub det_case: DetCase,
    pub nobs: usize,
    pub xi: f64,
    /// Critical values used, one per tested `r0`.
    pub critical_values: Vec<f64>,
    /// Reject flags for `r0 = 0, 1, ...` up to the first non-rejection.
    pub decisions: Vec<bool>,
    pub r_hat: usize,
    /// Every `r0 <= p - 1` was rejected; `r_hat` is capped at `p - 1`.
    pub ceiling: bool,
}

/// Sequential test of `H0: r = r0` against `r > r0` for `r0 = 0, 1, ...`,
/// stopping at the first non-rejection.
pub fn estimate_rank_nielsen(
    panel: &Panel,
    d1: f64,
    case: DetCase,
    table: &CriticalValueTable,
    xi: f64,
) -> Result<NielsenResult> {
    if (table.d1() - d1).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "critical values are for d1 = {}, test uses d1 = {d1}",
            table.d1()
        )));
    }
    if table.nobs() != panel.nobs() {
        return Err(Error::InvalidInput(format!(
            "critical values are for T = {}, panel has T = {}; simulate a table for this sample size",
            table.nobs(),
            panel.nobs()
        )));
    }
    let vr = variance_ratio(panel, d1, case)?;
    let p = vr.dim();
    let lambdas = vr.lambda_by_r0();
    let mut critical_values = Vec::new();
    let mut decisions = Vec::new();
    let mut r_hat = None;
    for (r0, &lambda) in lambdas.iter().enumerate() {
        let cv = table.lookup(case, xi, p - r0)?;
        critical_values.push(cv);
        let reject = lambda > cv;
        decisions.push(reject);
        if !reject {
            r_hat = Some(r0);
            break;
        }
    }
    let ceiling = r_hat.is_none();
    Ok(NielsenResult {
        eigenvalues: vr.eigenvalues,
        lambda_by_r0: lambdas,
        d1,
        det_case: case,
        nobs: panel.nobs(),
        xi,
        critical_values,
        decisions,
        r_hat: r_hat.unwrap_or(p - 1),
        ceiling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{replication_rng, standard_normals};

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
        DMatrix::from_vec(rows, cols, standard_normals(&mut replication_rng(seed, 0), rows * cols))
    }

    fn random_walks(t: usize, p: usize, seed: u64) -> Panel {
        let mut m = random_matrix(t, p, seed);
        for j in 0..p {
            for i in 1..t {
                m[(i, j)] += m[(i - 1, j)];
            }
        }
        Panel::from_unlabeled(m).unwrap()
    }

    #[test]
    fn deterministic_removal() {
        let p = Panel::from_columns(vec!["a".into(), "b".into()], &[vec![4.0; 5], vec![1.0, 3.0, 5.0, 7.0, 9.0]])
            .unwrap();
        assert_eq!(remove_deterministics(&p, DetCase::None).unwrap(), p);
        let c = remove_deterministics(&p, DetCase::Const).unwrap();
        assert!(c.column(0).iter().all(|&v| v == 0.0));
        let t = remove_deterministics(&p, DetCase::Trend).unwrap();
        assert!(t.values().iter().all(|v| v.abs() < 1e-12));
        let short = Panel::from_columns(vec!["a".into()], &[vec![1.0, 2.0]]).unwrap();
        assert!(remove_deterministics(&short, DetCase::Trend).is_err());
    }

    #[test]
    fn pencil_basics() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 8.0]);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let e = generalized_eigenvalues(&a, &b).unwrap();
        assert!((e[0] - 2.0).abs() < 1e-14 && (e[1] - 4.0).abs() < 1e-14);

        let m = random_matrix(5, 3, 1);
        let s = m.tr_mul(&m);
        let e = generalized_eigenvalues(&s, &s).unwrap();
        assert!(e.iter().all(|v| (v - 1.0).abs() < 1e-12));

        let not_pd = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert_eq!(generalized_eigenvalues(&a, &not_pd), Err(Error::NotPositiveDefinite));
    }

    #[test]
    fn pencil_congruence_invariance() {
        for seed in 0..10 {
            let m = random_matrix(8, 4, 100 + seed);
            let n = random_matrix(8, 4, 200 + seed);
            let c = random_matrix(4, 4, 300 + seed);
            let a = m.tr_mul(&m);
            let b = n.tr_mul(&n);
            let base = generalized_eigenvalues(&a, &b).unwrap();
            let moved = generalized_eigenvalues(&(&c * &a * c.transpose()), &(&c * &b * c.transpose())).unwrap();
            for (x, y) in base.iter().zip(&moved) {
                assert!((x - y).abs() <= 1e-8 * x.abs(), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn hand_computed_statistic() {
        let p = Panel::from_columns(vec!["z".into()], &[vec![1.0, 2.0]]).unwrap();
        let filter = FracFilter::new(-0.1, 2).unwrap();
        let cum = filter.apply(&[1.0, 2.0]);
        assert!((cum[0] - 1.0).abs() < 1e-15 && (cum[1] - 2.1).abs() < 1e-15);
        let vr = variance_ratio(&p, 0.1, DetCase::None).unwrap();
        assert!((vr.eigenvalues[0] - 5.0 / 5.41).abs() < 1e-15);
        let lambda = nielsen_lambda(&p, 0, 0.1, DetCase::None).unwrap();
        assert!((lambda - 2f64.powf(0.2) * 5.0 / 5.41).abs() < 1e-14);
        assert!((lambda - 1.0616).abs() < 1e-4);
    }

    #[test]
    fn zero_filter_order_gives_unit_eigenvalues() {
        let panel = random_walks(50, 3, 4);
        let z = remove_deterministics_matrix(panel.values(), DetCase::Const).unwrap();
        let e = pencil_eigenvalues(&z, &FracFilter::new(0.0, 50).unwrap()).unwrap();
        assert!(e.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!((scaled_sum(&e, 50, 0.0, 3) - 3.0).abs() < 1e-12);
        assert!(variance_ratio(&panel, 0.0, DetCase::None).is_err());
    }

    #[test]
    fn lambda_decreases_in_r0() {
        let vr = variance_ratio(&random_walks(120, 4, 9), 0.1, DetCase::Trend).unwrap();
        let l = vr.lambda_by_r0();
        assert!(vr.eigenvalues.iter().all(|&v| v > 0.0));
        assert!(l.windows(2).all(|w| w[0] > w[1]));
        assert!(vr.lambda(4).is_err());
    }

    #[test]
    fn invariant_to_column_mixing_and_shifts() {
        let panel = random_walks(200, 3, 11);
        let mix = random_matrix(3, 3, 12);
        let mixed = Panel::from_unlabeled(panel.values() * mix.transpose()).unwrap();
        let mut shifted = panel.values().clone();
        for j in 0..3 {
            shifted.column_mut(j).add_scalar_mut(5.0 * j as f64 - 3.0);
        }
        let shifted = Panel::from_unlabeled(shifted).unwrap();
        for case in DetCase::ALL {
            let base = variance_ratio(&panel, 0.1, case).unwrap().lambda_by_r0();
            let other = variance_ratio(&mixed, 0.1, case).unwrap().lambda_by_r0();
            for (x, y) in base.iter().zip(&other) {
                assert!((x - y).abs() <= 1e-8 * x.abs(), "{case}: {x} vs {y}");
            }
            if case != DetCase::None {
                let other = variance_ratio(&shifted, 0.1, case).unwrap().lambda_by_r0();
                for (x, y) in base.iter().zip(&other) {
                    assert!((x - y).abs() <= 1e-10, "{case}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn too_few_observations() {
        let panel = random_walks(3, 4, 1);
        assert_eq!(variance_ratio(&panel, 0.1, DetCase::None).unwrap_err(), Error::NotPositiveDefinite);
    }

    #[test]
    fn case_parsing() {
        for c in DetCase::ALL {
            assert_eq!(c.as_str().parse::<DetCase>().unwrap(), c);
        }
        assert!("quadratic".parse::<DetCase>().is_err());
    }
}
