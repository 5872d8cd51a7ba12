//! Alignment of normalized return series into an N x T panel.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::series::{normalize_values, NormalizedSeries};
use crate::stats;

/// How to reconcile mismatched date axes. Only intersection is supported:
/// forward-filling would fabricate zero returns and bias correlations upward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlignPolicy {
    #[default]
    Intersection,
}

/// N tickers by T shared dates of normalized returns; every row has zero mean
/// and unit population standard deviation on the shared axis.
#[derive(Debug, Clone)]
pub struct ReturnPanel {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// N x T, rows in ticker order.
    pub returns: DMatrix<f64>,
}

impl ReturnPanel {
    pub fn n_stocks(&self) -> usize {
        self.returns.nrows()
    }

    pub fn n_days(&self) -> usize {
        self.returns.ncols()
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.returns.row(i).iter().copied().collect()
    }

    pub fn ticker_index(&self, ticker: &str) -> Option<usize> {
        self.tickers.iter().position(|t| t == ticker)
    }

    /// Build directly from rows that already share a date axis, re-normalizing
    /// each row.
    pub fn from_rows(
        tickers: Vec<String>,
        dates: Vec<NaiveDate>,
        rows: Vec<Vec<f64>>,
    ) -> Result<Self> {
        assert_eq!(tickers.len(), rows.len());
        let t = dates.len();
        let mut returns = DMatrix::zeros(rows.len(), t);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), t, "row length mismatch");
            let m = stats::mean(row);
            let s = stats::population_std(row);
            if s <= 0.0 || !s.is_finite() {
                return Err(Error::ZeroVariance {
                    ticker: tickers[i].clone(),
                });
            }
            for (j, v) in row.iter().enumerate() {
                returns[(i, j)] = (v - m) / s;
            }
        }
        Ok(Self {
            tickers,
            dates,
            returns,
        })
    }
}

/// Dates dropped from each ticker when restricting to the shared axis.
#[derive(Debug, Clone, Default)]
pub struct AlignmentReport {
    pub dropped: BTreeMap<String, usize>,
    pub shared_days: usize,
}

/// Restrict a set of series to the intersection of their date axes and
/// re-normalize each restricted row so the panel invariants hold.
pub fn align_panel(
    series: &[NormalizedSeries],
    policy: AlignPolicy,
) -> Result<(ReturnPanel, AlignmentReport)> {
    let AlignPolicy::Intersection = policy;
    if series.len() < 2 {
        return Err(Error::NotEnoughSeries(series.len()));
    }
    let mut seen = BTreeSet::new();
    for s in series {
        if !seen.insert(s.ticker.as_str()) {
            return Err(Error::DuplicateTicker(s.ticker.clone()));
        }
    }

    let mut shared: BTreeSet<NaiveDate> = series[0].dates.iter().copied().collect();
    for s in &series[1..] {
        let axis: BTreeSet<NaiveDate> = s.dates.iter().copied().collect();
        shared = shared.intersection(&axis).copied().collect();
        if shared.is_empty() {
            return Err(Error::EmptyDateIntersection {
                tickers: vec![series[0].ticker.clone(), s.ticker.clone()],
            });
        }
    }
    let dates: Vec<NaiveDate> = shared.into_iter().collect();

    let mut report = AlignmentReport {
        shared_days: dates.len(),
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(series.len());
    let mut tickers = Vec::with_capacity(series.len());
    for s in series {
        let lookup: BTreeMap<NaiveDate, f64> =
            s.dates.iter().copied().zip(s.values.iter().copied()).collect();
        let row: Vec<f64> = dates.iter().map(|d| lookup[d]).collect();
        report
            .dropped
            .insert(s.ticker.clone(), s.len() - row.len());
        // re-normalize on the restricted axis
        let normalized = normalize_values(&s.ticker, &dates, &row)?;
        rows.push(normalized.values);
        tickers.push(s.ticker.clone());
    }

    let n = tickers.len();
    let t = dates.len();
    let mut returns = DMatrix::zeros(n, t);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            returns[(i, j)] = *v;
        }
    }
    Ok((
        ReturnPanel {
            tickers,
            dates,
            returns,
        },
        report,
    ))
}
