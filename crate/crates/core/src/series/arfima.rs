use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::frac::frac_filter;
use crate::error::{Error, Result};
use crate::rng::{replication_rng, standard_normals};

/// ARFIMA(p, d, q) with `Phi(L) (1 - L)^d y_t = theta(L) eps_t`.
///
/// `ar` holds `phi_1..phi_p` in `Phi(L) = 1 - phi_1 L - ... - phi_p L^p`;
/// `ma` holds `theta_1..theta_q` in `theta(L) = 1 + theta_1 L + ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArfimaSpec {
    d: f64,
    ar: Vec<f64>,
    ma: Vec<f64>,
    sigma: f64,
}

impl ArfimaSpec {
    pub fn new(d: f64, ar: Vec<f64>, ma: Vec<f64>, sigma: f64) -> Result<Self> {
        if !d.is_finite() {
            return Err(Error::InvalidSpec(format!("memory order must be finite, got {d}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidSpec(format!("sigma must be positive, got {sigma}")));
        }
        if ar.iter().chain(&ma).any(|c| !c.is_finite()) {
            return Err(Error::InvalidSpec("non-finite ARMA coefficient".into()));
        }
        if !roots_outside_unit_circle(&ar) {
            return Err(Error::InvalidSpec("AR polynomial has a root on or inside the unit circle".into()));
        }
        let neg_ma: Vec<f64> = ma.iter().map(|c| -c).collect();
        if !roots_outside_unit_circle(&neg_ma) {
            return Err(Error::InvalidSpec("MA polynomial has a root on or inside the unit circle".into()));
        }
        Ok(ArfimaSpec { d, ar, ma, sigma })
    }

    /// Pure fractional noise ARFIMA(0, d, 0).
    pub fn fractional_noise(d: f64, sigma: f64) -> Result<Self> {
        Self::new(d, Vec::new(), Vec::new(), sigma)
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn ar(&self) -> &[f64] {
        &self.ar
    }

    pub fn ma(&self) -> &[f64] {
        &self.ma
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

// Roots of 1 - c_1 z - ... - c_k z^k lie outside the unit circle iff the
// companion matrix of the recursion x_t = sum c_i x_{t-i} has spectral radius < 1.
fn roots_outside_unit_circle(c: &[f64]) -> bool {
    let k = c.len();
    if k == 0 {
        return true;
    }
    let mut companion = DMatrix::<f64>::zeros(k, k);
    for (j, &v) in c.iter().enumerate() {
        companion[(0, j)] = v;
    }
    for i in 1..k {
        companion[(i, i - 1)] = 1.0;
    }
    companion.complex_eigenvalues().iter().all(|z| z.norm() < 1.0 - 1e-10)
}

/// Simulates `T` observations of a type-II ARFIMA process.
///
/// Innovations are iid N(0, sigma^2) from replication stream 0 of `seed`
/// (see [`crate::rng`]). They are passed through the ARMA recursion with
/// zero pre-sample values and then cumulated with `(1 - L)^{-d}`.
pub fn simulate_arfima(t: usize, spec: &ArfimaSpec, seed: u64) -> Result<Vec<f64>> {
    simulate_arfima_stream(t, spec, seed, 0)
}

/// As [`simulate_arfima`], drawing from replication stream `stream`.
pub fn simulate_arfima_stream(t: usize, spec: &ArfimaSpec, seed: u64, stream: u64) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let mut rng = replication_rng(seed, stream);
    let eps: Vec<f64> = standard_normals(&mut rng, t).into_iter().map(|e| e * spec.sigma).collect();
    let u = arma_filter(&eps, &spec.ar, &spec.ma);
    if spec.d == 0.0 {
        return Ok(u);
    }
    frac_filter(&u, -spec.d)
}

fn arma_filter(eps: &[f64], ar: &[f64], ma: &[f64]) -> Vec<f64> {
    if ar.is_empty() && ma.is_empty() {
        return eps.to_vec();
    }
    let mut u = Vec::with_capacity(eps.len());
    for t in 0..eps.len() {
        let mut v = eps[t];
        for (j, &theta) in ma.iter().enumerate() {
            if t > j {
                v += theta * eps[t - j - 1];
            }
        }
        for (i, &phi) in ar.iter().enumerate() {
            if t > i {
                v += phi * u[t - i - 1];
            }
        }
        u.push(v);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::frac::frac_coeffs;

    #[test]
    fn validates_roots_and_sigma() {
        assert!(ArfimaSpec::new(0.3, vec![0.5], vec![0.4], 1.0).is_ok());
        assert!(ArfimaSpec::new(0.3, vec![1.0], vec![], 1.0).is_err());
        assert!(ArfimaSpec::new(0.3, vec![0.5, 0.6], vec![], 1.0).is_err());
        assert!(ArfimaSpec::new(0.3, vec![], vec![-1.2], 1.0).is_err());
        assert!(ArfimaSpec::new(0.3, vec![], vec![], 0.0).is_err());
        assert!(ArfimaSpec::new(f64::INFINITY, vec![], vec![], 1.0).is_err());
    }

    #[test]
    fn zero_order_returns_raw_draws() {
        let spec = ArfimaSpec::fractional_noise(0.0, 1.0).unwrap();
        let x = simulate_arfima(100, &spec, 42).unwrap();
        let eps = standard_normals(&mut replication_rng(42, 0), 100);
        assert_eq!(x, eps);
    }

    #[test]
    fn unit_order_is_cumulative_sum() {
        let spec = ArfimaSpec::fractional_noise(1.0, 1.0).unwrap();
        let x = simulate_arfima(2, &spec, 9).unwrap();
        let eps = standard_normals(&mut replication_rng(9, 0), 2);
        assert!((x[0] - eps[0]).abs() < 1e-15);
        assert!((x[1] - (eps[0] + eps[1])).abs() < 1e-15);
    }

    #[test]
    fn reproducible_given_seed() {
        let spec = ArfimaSpec::new(0.4, vec![0.3], vec![0.2], 2.0).unwrap();
        assert_eq!(simulate_arfima(300, &spec, 5).unwrap(), simulate_arfima(300, &spec, 5).unwrap());
        assert_ne!(simulate_arfima(300, &spec, 5).unwrap(), simulate_arfima(300, &spec, 6).unwrap());
    }

    #[test]
    fn arma_recursion() {
        let u = arma_filter(&[1.0, 0.0, 0.0], &[0.5], &[0.2]);
        assert_eq!(u, vec![1.0, 0.7, 0.35]);
    }

    #[test]
    fn variance_matches_truncated_filter() {
        // Var(y_t) = sigma^2 sum_{k<t} psi_k(d)^2 for the type-II process.
        let (t, d, sigma, reps) = (50, 0.4, 1.5, 10_000u64);
        let spec = ArfimaSpec::fractional_noise(d, sigma).unwrap();
        let mut sumsq = vec![0.0; t];
        for s in 0..reps {
            let x = simulate_arfima_stream(t, &spec, 2024, s).unwrap();
            for (acc, v) in sumsq.iter_mut().zip(&x) {
                *acc += v * v;
            }
        }
        let psi = frac_coeffs(-d, t).unwrap();
        let mut analytic = 0.0;
        for i in 0..t {
            analytic += psi.coeffs()[i].powi(2);
            let var = sumsq[i] / reps as f64;
            let expected = sigma * sigma * analytic;
            // chi-square(reps) relative sd is sqrt(2 / reps) ~ 0.014
            assert!((var / expected - 1.0).abs() < 0.06, "t={} var={var} expected={expected}", i + 1);
        }
    }
}
