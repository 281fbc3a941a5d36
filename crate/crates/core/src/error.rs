use thiserror::Error;

/// Errors raised by the estimation and testing routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("bandwidth m = {m} violates 1 <= m < T/2 for T = {t}")]
    Bandwidth { m: usize, t: usize },

    #[error("periodogram is zero over the whole band (constant series?)")]
    ZeroPeriodogram,

    #[error("invalid ARFIMA specification: {0}")]
    InvalidSpec(String),

    #[error("weighted periodogram average G is singular (near-collinear columns at the band)")]
    SingularG,

    #[error("X* denominator p^2 tr(RARA) - p = {0:e} is degenerate")]
    DegenerateDenominator(f64),

    #[error("matrix B is not positive definite (need T >= p and non-degenerate data)")]
    NotPositiveDefinite,

    #[error("no critical value for case={case}, xi={xi}, p-r={p_r}; simulate a table that covers it")]
    MissingCriticalValue { case: String, xi: f64, p_r: usize },

    #[error("malformed critical-value table: {0}")]
    TableFormat(String),
}

impl Error {
    /// True for failures of the numerical procedures, as opposed to bad
    /// arguments or malformed data.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroPeriodogram
                | Error::SingularG
                | Error::DegenerateDenominator(_)
                | Error::NotPositiveDefinite
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
