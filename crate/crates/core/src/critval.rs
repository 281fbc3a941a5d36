//! Monte Carlo critical values for the variance-ratio statistic.
//!
//! Under the null the `q = p - r` common trends are independent Gaussian
//! random walks. Each replication draws a `T x max_dim` block from its own
//! ChaCha20 stream (see [`crate::rng`]) and evaluates `Lambda_{q,0}(d1)` on
//! the first `q` columns for every `q = 1..=max_dim`, so each cell has the
//! exact `q`-dimensional null distribution. Replications are independent,
//! so the table does not depend on how many threads produce it.
//!
//! Tables are stored as comma-separated text with the header
//! `case,T,d1,xi,p_r,cv,reps,seed`, one row per cell. Floats are written in
//! shortest round-trip form, so reading and re-writing a file reproduces it
//! byte for byte.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::nielsen::{generalized_eigenvalues, moment_matrices, remove_deterministics_matrix, scaled_sum, DetCase};
use crate::rng::{replication_rng, standard_normals};
use crate::series::FracFilter;

pub const TABLE_HEADER: &str = "case,T,d1,xi,p_r,cv,reps,seed";

/// Significance levels with matching tolerance.
const XI_MATCH: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvEntry {
    pub case: DetCase,
    pub xi: f64,
    pub p_r: usize,
    pub cv: f64,
}

/// Critical values `CV_{xi, p-r}` for one sample size and filter order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalValueTable {
    d1: f64,
    nobs: usize,
    reps: usize,
    seed: Option<u64>,
    entries: Vec<CvEntry>,
}

impl CriticalValueTable {
    pub fn new(d1: f64, nobs: usize, reps: usize, seed: Option<u64>, entries: Vec<CvEntry>) -> Self {
        CriticalValueTable { d1, nobs, reps, seed, entries }
    }

    pub fn d1(&self) -> f64 {
        self.d1
    }

    pub fn nobs(&self) -> usize {
        self.nobs
    }

    pub fn reps(&self) -> usize {
        self.reps
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn entries(&self) -> &[CvEntry] {
        &self.entries
    }

    /// Deterministic cases present, in first-appearance order.
    pub fn cases(&self) -> Vec<DetCase> {
        let mut out = Vec::new();
        for e in &self.entries {
            if !out.contains(&e.case) {
                out.push(e.case);
            }
        }
        out
    }

    /// Significance levels present, in first-appearance order.
    pub fn xis(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for e in &self.entries {
            if !out.iter().any(|x| (x - e.xi).abs() < XI_MATCH) {
                out.push(e.xi);
            }
        }
        out
    }

    /// Quantile levels `1 - xi`.
    pub fn quantile_levels(&self) -> Vec<f64> {
        self.xis().into_iter().map(|x| 1.0 - x).collect()
    }

    pub fn max_dim(&self) -> usize {
        self.entries.iter().map(|e| e.p_r).max().unwrap_or(0)
    }

    /// Stored value for `(case, xi, p - r)`; no interpolation.
    pub fn lookup(&self, case: DetCase, xi: f64, p_r: usize) -> Result<f64> {
        self.entries
            .iter()
            .find(|e| e.case == case && e.p_r == p_r && (e.xi - xi).abs() < XI_MATCH)
            .map(|e| e.cv)
            .ok_or(Error::MissingCriticalValue { case: case.to_string(), xi, p_r })
    }

    /// Violations of the ordering CV(0.01) >= CV(0.05) >= CV(0.10) and of
    /// monotonicity in `p - r`.
    pub fn monotonicity_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut xis = self.xis();
        xis.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        for case in self.cases() {
            for p_r in 1..=self.max_dim() {
                let column: Vec<(f64, f64)> =
                    xis.iter().filter_map(|&xi| self.lookup(case, xi, p_r).ok().map(|cv| (xi, cv))).collect();
                for w in column.windows(2) {
                    if w[0].1 < w[1].1 {
                        out.push(format!(
                            "{case}, p-r={p_r}: CV({}) = {} < CV({}) = {}",
                            w[0].0, w[0].1, w[1].0, w[1].1
                        ));
                    }
                }
            }
            for &xi in &xis {
                for p_r in 1..self.max_dim() {
                    if let (Ok(a), Ok(b)) = (self.lookup(case, xi, p_r), self.lookup(case, xi, p_r + 1)) {
                        if b < a {
                            out.push(format!("{case}, xi={xi}: CV(p-r={}) = {b} < CV(p-r={p_r}) = {a}", p_r + 1));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::from(TABLE_HEADER);
        s.push('\n');
        let seed = self.seed.map(|v| v.to_string()).unwrap_or_default();
        for e in &self.entries {
            writeln!(s, "{},{},{},{},{},{},{},{}", e.case, self.nobs, self.d1, e.xi, e.p_r, e.cv, self.reps, seed)
                .expect("writing to a string");
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == TABLE_HEADER => {}
            Some(h) => return Err(Error::TableFormat(format!("expected header `{TABLE_HEADER}`, found `{h}`"))),
            None => return Err(Error::TableFormat("empty table".into())),
        }
        let mut meta: Option<(usize, f64, usize, Option<u64>)> = None;
        let mut entries = Vec::new();
        for (n, line) in lines.enumerate() {
            let row = n + 2;
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 8 {
                return Err(Error::TableFormat(format!("line {row}: expected 8 fields, found {}", fields.len())));
            }
            let bad = |what: &str| Error::TableFormat(format!("line {row}: invalid {what}"));
            let case: DetCase = fields[0].parse().map_err(|_| bad("case"))?;
            let nobs: usize = fields[1].parse().map_err(|_| bad("T"))?;
            let d1: f64 = fields[2].parse().map_err(|_| bad("d1"))?;
            let xi: f64 = fields[3].parse().map_err(|_| bad("xi"))?;
            let p_r: usize = fields[4].parse().map_err(|_| bad("p_r"))?;
            let cv: f64 = fields[5].parse().map_err(|_| bad("cv"))?;
            let reps: usize = fields[6].parse().map_err(|_| bad("reps"))?;
            let seed: Option<u64> = if fields[7].is_empty() {
                None
            } else {
                Some(fields[7].parse().map_err(|_| bad("seed"))?)
            };
            if !(xi > 0.0 && xi < 1.0) || p_r == 0 || !cv.is_finite() {
                return Err(bad("cell"));
            }
            match meta {
                None => meta = Some((nobs, d1, reps, seed)),
                Some(m) if m == (nobs, d1, reps, seed) => {}
                Some(_) => {
                    return Err(Error::TableFormat(format!(
                        "line {row}: T, d1, reps and seed must be identical on every row"
                    )))
                }
            }
            if entries.iter().any(|e: &CvEntry| e.case == case && e.p_r == p_r && (e.xi - xi).abs() < XI_MATCH) {
                return Err(Error::TableFormat(format!("line {row}: duplicate cell")));
            }
            entries.push(CvEntry { case, xi, p_r, cv });
        }
        let (nobs, d1, reps, seed) = meta.ok_or_else(|| Error::TableFormat("table has no rows".into()))?;
        Ok(CriticalValueTable { d1, nobs, reps, seed, entries })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_csv_string())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::TableFormat(format!("cannot read {}: {e}", path.display())))?;
        Self::from_csv_str(&text)
    }
}

/// Parameters of a critical-value simulation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvSimConfig {
    pub nobs: usize,
    pub max_dim: usize,
    pub d1: f64,
    pub cases: Vec<DetCase>,
    /// Upper quantile levels, e.g. 0.90, 0.95, 0.99.
    pub quantile_levels: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

impl CvSimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps < 1000 {
            return Err(Error::InvalidInput(format!("need at least 1000 replications, got {}", self.reps)));
        }
        if self.max_dim < 1 {
            return Err(Error::InvalidInput("max_dim must be at least 1".into()));
        }
        if !(self.d1 > 0.0 && self.d1.is_finite()) {
            return Err(Error::InvalidInput(format!("d1 must be positive, got {}", self.d1)));
        }
        if self.cases.is_empty() {
            return Err(Error::InvalidInput("no deterministic cases requested".into()));
        }
        if self.nobs < self.max_dim + 3 {
            return Err(Error::InvalidInput(format!(
                "T = {} is too short for {} common trends",
                self.nobs, self.max_dim
            )));
        }
        if self.quantile_levels.is_empty() || self.quantile_levels.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::InvalidInput("quantile levels must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Significance level `1 - level`, rounded to 12 decimals so that e.g.
/// 0.95 maps to exactly `0.05`.
pub fn xi_from_level(level: f64) -> f64 {
    ((1.0 - level) * 1e12).round() / 1e12
}

/// Raw null draws: `stats[c][q - 1][rep]` for case `cases[c]`.
#[derive(Debug, Clone)]
pub struct NullDraws {
    pub cases: Vec<DetCase>,
    pub stats: Vec<Vec<Vec<f64>>>,
}

fn replication(cfg: &CvSimConfig, filter: &FracFilter, rep: u64) -> Result<Vec<Vec<f64>>> {
    let t = cfg.nobs;
    let mut rng = replication_rng(cfg.seed, rep);
    let mut z = DMatrix::from_vec(t, cfg.max_dim, standard_normals(&mut rng, t * cfg.max_dim));
    for j in 0..cfg.max_dim {
        let mut col = z.column_mut(j);
        for i in 1..t {
            col[i] += col[i - 1];
        }
    }
    cfg.cases
        .iter()
        .map(|&case| {
            let zc = remove_deterministics_matrix(&z, case)?;
            let (a, b) = moment_matrices(&zc, filter);
            (1..=cfg.max_dim)
                .map(|q| {
                    let eig = generalized_eigenvalues(&a.view((0, 0), (q, q)).into(), &b.view((0, 0), (q, q)).into())?;
                    Ok(scaled_sum(&eig, t, cfg.d1, q))
                })
                .collect()
        })
        .collect()
}

/// Simulates `Lambda_{q,0}(d1)` under the random-walk null for every case
/// and `q = 1..=max_dim`.
pub fn simulate_null_statistics(cfg: &CvSimConfig) -> Result<NullDraws> {
    cfg.validate()?;
    let filter = FracFilter::new(-cfg.d1, cfg.nobs)?;
    let per_rep: Vec<Vec<Vec<f64>>> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| replication(cfg, &filter, rep))
        .collect::<Result<_>>()?;
    let mut stats = vec![vec![Vec::with_capacity(cfg.reps); cfg.max_dim]; cfg.cases.len()];
    for rep in &per_rep {
        for (c, by_q) in rep.iter().enumerate() {
            for (q, &v) in by_q.iter().enumerate() {
                stats[c][q].push(v);
            }
        }
    }
    Ok(NullDraws { cases: cfg.cases.clone(), stats })
}

/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending.
pub fn quantile(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Builds the table of upper quantiles from raw null draws.
pub fn table_from_draws(cfg: &CvSimConfig, draws: &NullDraws) -> CriticalValueTable {
    let mut entries = Vec::new();
    for (c, &case) in draws.cases.iter().enumerate() {
        let sorted: Vec<Vec<f64>> = draws.stats[c]
            .iter()
            .map(|v| {
                let mut s = v.clone();
                s.sort_by(|a, b| a.partial_cmp(b).expect("finite statistic"));
                s
            })
            .collect();
        for &level in &cfg.quantile_levels {
            for (q, s) in sorted.iter().enumerate() {
                entries.push(CvEntry { case, xi: xi_from_level(level), p_r: q + 1, cv: quantile(s, level) });
            }
        }
    }
    CriticalValueTable::new(cfg.d1, cfg.nobs, cfg.reps, Some(cfg.seed), entries)
}

/// Simulated critical-value table.
pub fn simulate_cv_table(cfg: &CvSimConfig) -> Result<CriticalValueTable> {
    let draws = simulate_null_statistics(cfg)?;
    Ok(table_from_draws(cfg, &draws))
}

/// Sample sizes with a bundled reference table.
pub const REFERENCE_SAMPLE_SIZES: [usize; 3] = [66, 150, 1000];

/// Published critical values (100000 replications, d1 = 0.1) for
/// T in {66, 150, 1000}, cases none/const/trend, xi in {0.10, 0.05, 0.01}
/// and p - r = 1..17.
pub fn reference_table(nobs: usize) -> Option<CriticalValueTable> {
    let text = match nobs {
        66 => include_str!("../data/reference_T66.csv"),
        150 => include_str!("../data/reference_T150.csv"),
        1000 => include_str!("../data/reference_T1000.csv"),
        _ => return None,
    };
    Some(CriticalValueTable::from_csv_str(text).expect("bundled table is well formed"))
}

/// Reference cells presumed misprinted: T=1000 none xi=0.10 p-r=15 breaks
/// monotonicity, and the T=1000 const column at p-r=11 jumps far above the
/// spacing of its neighbours.
pub fn is_suspect_reference_cell(nobs: usize, case: DetCase, xi: f64, p_r: usize) -> bool {
    nobs == 1000
        && ((case == DetCase::None && (xi - 0.10).abs() < XI_MATCH && p_r == 15)
            || (case == DetCase::Const && p_r == 11))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellComparison {
    pub case: DetCase,
    pub xi: f64,
    pub p_r: usize,
    pub simulated: f64,
    pub reference: f64,
    pub diff: f64,
    pub within_tolerance: bool,
    pub suspect_reference: bool,
}

/// Cell-by-cell comparison of a simulated table with a reference on the
/// cells both contain.
pub fn compare_tables(
    simulated: &CriticalValueTable,
    reference: &CriticalValueTable,
    tolerance: f64,
) -> Vec<CellComparison> {
    simulated
        .entries()
        .iter()
        .filter_map(|e| {
            let r = reference.lookup(e.case, e.xi, e.p_r).ok()?;
            let diff = e.cv - r;
            Some(CellComparison {
                case: e.case,
                xi: e.xi,
                p_r: e.p_r,
                simulated: e.cv,
                reference: r,
                diff,
                within_tolerance: diff.abs() <= tolerance,
                suspect_reference: is_suspect_reference_cell(reference.nobs(), e.case, e.xi, e.p_r),
            })
        })
        .collect()
}
