use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the analysis kernels.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("series {ticker}: non-positive value {value} on {date}")]
    NonPositiveValue {
        ticker: String,
        date: NaiveDate,
        value: f64,
    },
    #[error("series {ticker}: has {len} points, need at least {min}")]
    SeriesTooShort {
        ticker: String,
        len: usize,
        min: usize,
    },
    #[error("series {ticker}: dates not strictly increasing at {date}")]
    NonIncreasingDates { ticker: String, date: NaiveDate },
    #[error("series {ticker}: zero variance (flat or halted series)")]
    ZeroVariance { ticker: String },
    #[error("panel alignment needs at least 2 series, got {0}")]
    NotEnoughSeries(usize),
    #[error("duplicate ticker {0} in panel input")]
    DuplicateTicker(String),
    #[error("empty date intersection; offending tickers: {}", tickers.join(", "))]
    EmptyDateIntersection { tickers: Vec<String> },

    #[error("Marchenko-Pastur bounds need T >= N >= 1, got N={n}, T={t} (Q={q})")]
    OutOfMpRegime { n: usize, t: usize, q: f64 },
    #[error("eigensolver failed to converge for {n}x{n} matrix")]
    EigenConvergence { n: usize },
    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("mode 0 is the market mode; pass allow_market_mode to analyze it anyway")]
    MarketModeExcluded,
    #[error("threshold u_c must be positive, got {0}")]
    NonPositiveThreshold(f64),
    #[error("unknown ticker {0}")]
    UnknownTicker(String),
    #[error("baseline needs n_samples >= {min}, got {got}")]
    NotEnoughSamples { min: usize, got: usize },
    #[error("baseline side sizes {pos}+{neg} exceed panel size {n}")]
    SideSizesExceedPanel { pos: usize, neg: usize, n: usize },
    #[error("D undefined: C_rand + C_real = 0 (C_rand={c_rand}, C_real={c_real})")]
    UndefinedD { c_rand: f64, c_real: f64 },

    #[error("leverage curve needs series length > t_max >= 1 (len={len}, t_max={t_max})")]
    BadLagRange { len: usize, t_max: usize },
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error("fit window [{lo}, {hi}] invalid for curve with t_max {t_max} (need >= {min_points} points)")]
    BadFitWindow {
        lo: usize,
        hi: usize,
        t_max: usize,
        min_points: usize,
    },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("split boundary {boundary} leaves an empty side")]
    EmptySplit { boundary: NaiveDate },
    #[error("leverage curves have mismatched lag axes")]
    LagAxisMismatch,

    #[error("no interval set with >= 2 intervals to pool")]
    NothingToPool,
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("power-law fit: {0}")]
    PowerLawFit(String),

    #[error("synthetic config: {0}")]
    SynthConfig(String),
}
