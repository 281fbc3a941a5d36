use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracoint::memory::MeanHandling;
use fracoint::nielsen::{DetCase, DEFAULT_D1};
use serde::{Deserialize, Serialize};

use crate::input::{LoadOptions, Transform};

pub const DEFAULT_BANDWIDTHS: [usize; 4] = [18, 20, 23, 28];

#[derive(Debug, Parser)]
#[command(name = "fracoint", version, about = "Long-memory estimation and fractional cointegration rank tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format written to standard output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorArg {
    /// Local Whittle (stationary series).
    Lw,
    /// Exact local Whittle (any order of integration).
    Elw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeanArg {
    None,
    Demean,
    FirstObs,
}

impl From<MeanArg> for MeanHandling {
    fn from(m: MeanArg) -> Self {
        match m {
            MeanArg::None => MeanHandling::None,
            MeanArg::Demean => MeanHandling::Demean,
            MeanArg::FirstObs => MeanHandling::FirstObs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CaseArg {
    None,
    Const,
    Trend,
}

impl From<CaseArg> for DetCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::None => DetCase::None,
            CaseArg::Const => DetCase::Const,
            CaseArg::Trend => DetCase::Trend,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Panel CSV: header of series names, one row per period.
    pub input: PathBuf,

    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,

    /// The first column holds period labels.
    #[arg(long)]
    pub time_column: bool,

    /// Transform applied after loading.
    #[arg(long, value_enum, default_value_t = Transform::None)]
    pub transform: Transform,
}

impl InputArgs {
    pub fn load_options(&self) -> LoadOptions {
        LoadOptions { delimiter: self.delimiter as u8, time_column: self.time_column }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Memory estimates for every series at every bandwidth.
    Memory {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "bandwidth", short = 'm', value_delimiter = ',', default_values_t = DEFAULT_BANDWIDTHS)]
        bandwidths: Vec<usize>,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Lw)]
        estimator: EstimatorArg,
        /// Level handling for the exact local Whittle estimator.
        #[arg(long, value_enum, default_value_t = MeanArg::Demean)]
        mean: MeanArg,
    },
    /// X* test of no cointegration on selected columns.
    Xstar {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "bandwidth", short = 'm', value_delimiter = ',', default_values_t = DEFAULT_BANDWIDTHS)]
        bandwidths: Vec<usize>,
        /// Columns to test (labels); all columns when omitted.
        #[arg(long, value_delimiter = ',')]
        columns: Vec<String>,
        /// Weights for the pooled memory estimate; 1/p each when omitted.
        #[arg(long, value_delimiter = ',')]
        weights: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Sequential rank estimate built on X* tests.
    RankHualde {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long = "bandwidth", short = 'm', value_delimiter = ',', default_values_t = DEFAULT_BANDWIDTHS)]
        bandwidths: Vec<usize>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Rejection threshold used instead of the chi-square quantile.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Variance-ratio rank test.
    RankNielsen {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_D1)]
        d1: f64,
        #[arg(long = "case", value_enum, default_value_t = CaseArg::Trend)]
        case: CaseArg,
        #[arg(long, default_value_t = 0.05)]
        xi: f64,
        /// Critical-value table file; the bundled table for T is used otherwise.
        #[arg(long)]
        cv_table: Option<PathBuf>,
        /// Simulate critical values with this many replications instead.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Simulate a critical-value table.
    SimulateCv {
        #[arg(long = "nobs", short = 't')]
        nobs: usize,
        #[arg(long, default_value_t = 17)]
        max_dim: usize,
        #[arg(long, default_value_t = DEFAULT_D1)]
        d1: f64,
        #[arg(long = "cases", value_enum, value_delimiter = ',', default_values_t = [CaseArg::None, CaseArg::Const, CaseArg::Trend])]
        cases: Vec<CaseArg>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.90, 0.95, 0.99])]
        levels: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Table file to write.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
    /// Cross-sectional dispersion of every period.
    Sigma {
        #[command(flatten)]
        input: InputArgs,
        /// CSV file for the dispersion series.
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
        /// SVG line chart of the dispersion series.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Simulate a panel of independent ARFIMA(0, d, 0) series.
    SimulatePanel {
        #[arg(long = "nobs", short = 't')]
        nobs: usize,
        /// One memory parameter per series.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        d: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write positive levels `base * exp(cumsum(drift + scale * x))`.
        #[arg(long)]
        levels: bool,
        #[arg(long, default_value_t = 0.02)]
        drift: f64,
        #[arg(long, default_value_t = 0.02)]
        scale: f64,
        #[arg(long, default_value_t = 100.0)]
        base: f64,
        /// Label of the first period; later periods count up from it.
        #[arg(long)]
        start_period: Option<i64>,
        #[arg(long, short = 'o')]
        output: Option<PathBuf>,
    },
}

/// Level construction of a simulated panel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub drift: f64,
    pub scale: f64,
    pub base: f64,
}

/// Echo of the settings a report was produced with.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<char>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_column: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<Transform>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bandwidths: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<EstimatorArg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<MeanHandling>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub columns: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub det_case: Option<DetCase>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cases: Vec<DetCase>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub levels: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_table: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub d: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub panel_levels: Option<LevelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_period: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<String>,
    pub format: Format,
}

fn path_string(p: &std::path::Path) -> String {
    p.display().to_string()
}

impl RunConfig {
    fn with_input(input: &InputArgs, format: Format) -> Self {
        RunConfig {
            input: Some(path_string(&input.input)),
            delimiter: Some(input.delimiter),
            time_column: Some(input.time_column),
            transform: Some(input.transform),
            format,
            ..Default::default()
        }
    }

    pub fn from_cli(cli: &Cli) -> Self {
        let format = cli.format;
        match &cli.command {
            Command::Memory { input, bandwidths, estimator, mean } => RunConfig {
                bandwidths: bandwidths.clone(),
                estimator: Some(*estimator),
                mean: (*estimator == EstimatorArg::Elw).then(|| (*mean).into()),
                ..Self::with_input(input, format)
            },
            Command::Xstar { input, bandwidths, columns, weights, alpha } => RunConfig {
                bandwidths: bandwidths.clone(),
                columns: columns.clone(),
                weights: weights.clone(),
                alpha: Some(*alpha),
                ..Self::with_input(input, format)
            },
            Command::RankHualde { input, bandwidths, alpha, threshold } => RunConfig {
                bandwidths: bandwidths.clone(),
                alpha: threshold.is_none().then_some(*alpha),
                threshold: *threshold,
                ..Self::with_input(input, format)
            },
            Command::RankNielsen { input, d1, case, xi, cv_table, reps, seed } => RunConfig {
                d1: Some(*d1),
                det_case: Some((*case).into()),
                xi: Some(*xi),
                cv_table: cv_table.as_deref().map(path_string),
                reps: *reps,
                seed: reps.map(|_| *seed),
                ..Self::with_input(input, format)
            },
            Command::SimulateCv { nobs, max_dim, d1, cases, levels, reps, seed, output } => RunConfig {
                nobs: Some(*nobs),
                max_dim: Some(*max_dim),
                d1: Some(*d1),
                cases: cases.iter().map(|&c| c.into()).collect(),
                levels: levels.clone(),
                reps: Some(*reps),
                seed: Some(*seed),
                output: output.as_deref().map(path_string),
                format,
                ..Default::default()
            },
            Command::Sigma { input, output, plot } => RunConfig {
                output: output.as_deref().map(path_string),
                plot: plot.as_deref().map(path_string),
                ..Self::with_input(input, format)
            },
            Command::SimulatePanel { nobs, d, seed, levels, drift, scale, base, start_period, output } => RunConfig {
                nobs: Some(*nobs),
                d: d.clone(),
                seed: Some(*seed),
                panel_levels: levels.then_some(LevelSpec { drift: *drift, scale: *scale, base: *base }),
                start_period: *start_period,
                output: output.as_deref().map(path_string),
                format,
                ..Default::default()
            },
        }
    }
}
