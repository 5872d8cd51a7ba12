//! Daily series types and the return/volatility transforms.
//!
//! A raw [`DailySeries`] (close prices or trading volumes) turns into
//! log-returns, which are normalized to zero mean and unit standard
//! deviation; the volatility is the absolute normalized return. Moments use
//! the population convention throughout (divide by n).

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::stats;

/// Strictly positive daily observations (prices or volumes) on a strictly
/// increasing date axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DailySeries {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl DailySeries {
    pub fn new(ticker: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        let ticker = ticker.into();
        assert_eq!(dates.len(), values.len(), "dates/values length mismatch");
        for w in dates.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::NonIncreasingDates {
                    ticker,
                    date: w[1],
                });
            }
        }
        for (date, &value) in dates.iter().zip(&values) {
            if value <= 0.0 || value.is_nan() {
                return Err(Error::NonPositiveValue {
                    ticker,
                    date: *date,
                    value,
                });
            }
        }
        Ok(Self {
            ticker,
            dates,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Dimensionless log-returns; one value fewer than the source per day of lag.
/// Each return is stamped with the later of the two dates it spans.
#[derive(Debug, Clone, PartialEq)]
pub struct RawReturnSeries {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

/// Returns normalized to zero mean and unit population standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSeries {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl NormalizedSeries {
    /// Tolerance on the mean-0 / sigma-1 invariants.
    pub const TOL: f64 = 1e-12;

    pub fn new(ticker: impl Into<String>, dates: Vec<NaiveDate>, values: Vec<f64>) -> Result<Self> {
        let ticker = ticker.into();
        assert_eq!(dates.len(), values.len(), "dates/values length mismatch");
        let m = stats::mean(&values);
        let s = stats::population_std(&values);
        if m.abs() > Self::TOL || (s - 1.0).abs() > Self::TOL {
            return Err(Error::DegenerateSeries(format!(
                "{ticker}: not normalized (mean {m:e}, sigma-1 {:e})",
                s - 1.0
            )));
        }
        Ok(Self {
            ticker,
            dates,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Absolute normalized returns.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySeries {
    pub ticker: String,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

/// Log-returns over a lag of `delta_t` days: out[k] = ln v[k+dt] - ln v[k].
pub fn log_returns(series: &DailySeries, delta_t: usize) -> Result<RawReturnSeries> {
    assert!(delta_t >= 1, "delta_t must be >= 1");
    if series.len() < delta_t + 1 {
        return Err(Error::SeriesTooShort {
            ticker: series.ticker.clone(),
            len: series.len(),
            min: delta_t + 1,
        });
    }
    for (date, &value) in series.dates.iter().zip(&series.values) {
        if value <= 0.0 || value.is_nan() {
            return Err(Error::NonPositiveValue {
                ticker: series.ticker.clone(),
                date: *date,
                value,
            });
        }
    }
    let n = series.len() - delta_t;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        values.push(series.values[k + delta_t].ln() - series.values[k].ln());
    }
    Ok(RawReturnSeries {
        ticker: series.ticker.clone(),
        dates: series.dates[delta_t..].to_vec(),
        values,
    })
}

/// Volume returns: log-change of successive daily volumes (lag fixed at one day).
pub fn volume_returns(series: &DailySeries) -> Result<RawReturnSeries> {
    log_returns(series, 1)
}

/// Center and scale to zero mean and unit population standard deviation.
pub fn normalize(raw: &RawReturnSeries) -> Result<NormalizedSeries> {
    normalize_values(&raw.ticker, &raw.dates, &raw.values)
}

pub(crate) fn normalize_values(
    ticker: &str,
    dates: &[NaiveDate],
    values: &[f64],
) -> Result<NormalizedSeries> {
    if values.len() < 2 {
        return Err(Error::SeriesTooShort {
            ticker: ticker.to_string(),
            len: values.len(),
            min: 2,
        });
    }
    let m = stats::mean(values);
    let s = stats::population_std(values);
    if s <= 0.0 || !s.is_finite() {
        return Err(Error::ZeroVariance {
            ticker: ticker.to_string(),
        });
    }
    let values = values.iter().map(|v| (v - m) / s).collect();
    Ok(NormalizedSeries {
        ticker: ticker.to_string(),
        dates: dates.to_vec(),
        values,
    })
}

/// Elementwise absolute value; dates preserved.
pub fn volatility(series: &NormalizedSeries) -> VolatilitySeries {
    VolatilitySeries {
        ticker: series.ticker.clone(),
        dates: series.dates.clone(),
        values: series.values.iter().map(|v| v.abs()).collect(),
    }
}

#[cfg(test)]
pub(crate) fn test_dates(n: usize) -> Vec<NaiveDate> {
    crate::synth::synthetic_dates(n)
}
