//! Bounded scalar minimisation for the Whittle objectives.
//!
//! A coarse grid locates the basin. When the coarse profile has a single
//! local minimum the neighbouring grid points form the bracket; otherwise a
//! dense grid (401 points) picks the global basin. Golden-section search
//! then narrows the bracket to the requested tolerance, and the result is
//! polished by bisection on the sign of the analytic slope. The sign of the
//! slope is unaffected by rescaling the data, so the polished minimiser is
//! reproducible to rounding level under such changes.

pub(crate) trait ScalarObjective {
    fn value(&self, x: f64) -> f64;
    /// Any positive multiple of the derivative.
    fn slope(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Minimum {
    pub x: f64,
    pub value: f64,
    pub dense_grid: bool,
}

const COARSE_POINTS: usize = 41;
pub(crate) const DENSE_POINTS: usize = 401;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Index of the smallest value; the first one on ties.
fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

fn local_minima(values: &[f64]) -> usize {
    let n = values.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || values[i] < values[i - 1];
            let right = i + 1 == n || values[i] <= values[i + 1];
            left && right
        })
        .count()
}

pub(crate) fn minimize<F: ScalarObjective>(f: &F, lo: f64, hi: f64, tol: f64) -> Minimum {
    debug_assert!(lo < hi);
    let coarse = grid(lo, hi, COARSE_POINTS);
    let values: Vec<f64> = coarse.iter().map(|&x| finite_or_inf(f.value(x))).collect();
    let (xs, vals, dense) = if local_minima(&values) == 1 {
        (coarse, values, false)
    } else {
        let dense = grid(lo, hi, DENSE_POINTS);
        let v = dense.iter().map(|&x| finite_or_inf(f.value(x))).collect();
        (dense, v, true)
    };
    let i = argmin(&vals);
    let a = xs[i.saturating_sub(1)];
    let b = xs[(i + 1).min(xs.len() - 1)];

    let (mut a, mut b) = (a, b);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = finite_or_inf(f.value(x1));
    let mut f2 = finite_or_inf(f.value(x2));
    while b - a > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = finite_or_inf(f.value(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = finite_or_inf(f.value(x2));
        }
    }
    let golden = 0.5 * (a + b);

    let x = polish(f, a, b, lo, hi, tol).unwrap_or(golden);
    let mut best = Minimum { x, value: finite_or_inf(f.value(x)), dense_grid: dense };
    // never return something worse than the best grid point
    if vals[i] < best.value {
        best.x = xs[i];
        best.value = vals[i];
    }
    best
}

fn polish<F: ScalarObjective>(f: &F, a: f64, b: f64, lo: f64, hi: f64, tol: f64) -> Option<f64> {
    let straddles = |l: f64, r: f64| f.slope(l) < 0.0 && f.slope(r) > 0.0;
    let (mut l, mut r) = if straddles(a, b) {
        (a, b)
    } else {
        let l = (a - 10.0 * tol).max(lo);
        let r = (b + 10.0 * tol).min(hi);
        if !straddles(l, r) {
            return None;
        }
        (l, r)
    };
    for _ in 0..200 {
        let mid = 0.5 * (l + r);
        if mid <= l || mid >= r {
            break;
        }
        if f.slope(mid) > 0.0 {
            r = mid;
        } else {
            l = mid;
        }
    }
    Some(0.5 * (l + r))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic(f64);
    impl ScalarObjective for Quadratic {
        fn value(&self, x: f64) -> f64 {
            (x - self.0).powi(2)
        }
        fn slope(&self, x: f64) -> f64 {
            2.0 * (x - self.0)
        }
    }

    // Two basins, the deeper one on the right.
    struct TwoWells;
    impl ScalarObjective for TwoWells {
        fn value(&self, x: f64) -> f64 {
            ((x + 0.3).powi(2) - 0.01) * ((x - 0.6).powi(2) - 0.02) + 0.1 * (x - 0.6).powi(2)
        }
        fn slope(&self, x: f64) -> f64 {
            let h = 1e-7;
            self.value(x + h) - self.value(x - h)
        }
    }

    #[test]
    fn finds_interior_minimum() {
        let m = minimize(&Quadratic(0.123_456_7), -0.5, 1.0, 1e-6);
        assert!((m.x - 0.123_456_7).abs() < 1e-12);
        assert!(!m.dense_grid);
    }

    #[test]
    fn boundary_minimum() {
        let m = minimize(&Quadratic(-2.0), -0.5, 1.0, 1e-6);
        assert!((m.x + 0.5).abs() < 1e-6);
    }

    #[test]
    fn falls_back_to_dense_grid_when_multimodal() {
        let m = minimize(&TwoWells, -1.0, 1.5, 1e-6);
        assert!(m.dense_grid);
        let oracle = (0..=100_000)
            .map(|i| -1.0 + 2.5 * i as f64 / 100_000.0)
            .min_by(|a, b| TwoWells.value(*a).partial_cmp(&TwoWells.value(*b)).unwrap())
            .unwrap();
        assert!((m.x - oracle).abs() < 1e-4, "{} vs {oracle}", m.x);
    }

    #[test]
    fn flat_objective_picks_smallest() {
        struct Flat;
        impl ScalarObjective for Flat {
            fn value(&self, _: f64) -> f64 {
                1.0
            }
            fn slope(&self, _: f64) -> f64 {
                0.0
            }
        }
        let m = minimize(&Flat, -0.5, 1.0, 1e-6);
        assert!((m.x + 0.5).abs() < 1e-6);
    }
}
