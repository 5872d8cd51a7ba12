//! Return-volatility correlation function and its exponential fits.
//!
//! ```text
//! L(t) = [<r(t') |r(t'+t)|^2> - L_0] / Z
//! Z    = <|r(t')|^2>^2
//! L_0  = <r(t')> <|r(t')|^2>
//! ```
//!
//! Negative L(t) is the leverage effect (past losses raise future
//! volatility), positive L(t) the anti-leverage effect. The single-series
//! moments `<r>` and `<|r|^2>` run over the whole analyzed window; the lag
//! average runs over all valid t'.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{normalize_values, NormalizedSeries};
use crate::stats;

/// Exponential fit L(t) = c exp(-t / tau) over a lag window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExpFit {
    /// amplitude c; negative for leverage, positive for anti-leverage
    pub amplitude: f64,
    /// decay time tau in days
    pub decay_days: f64,
    pub residual_norm: f64,
    pub window: (usize, usize),
}

/// L(t) for t = 1..=t_max with the sample count entering each lag average.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeverageCurve {
    pub lags: Vec<usize>,
    pub values: Vec<f64>,
    pub counts: Vec<usize>,
    pub fit: Option<ExpFit>,
}

impl LeverageCurve {
    pub fn t_max(&self) -> usize {
        self.lags.len()
    }

    /// L at lag t (1-based).
    pub fn at(&self, t: usize) -> f64 {
        self.values[t - 1]
    }
}

/// Compute L(t) for lags 1..=t_max from a return series.
///
/// The moments in Z and L_0 make the estimator self-normalizing, so the
/// input does not need to be normalized beforehand; the pipeline still feeds
/// it normalized returns.
pub fn return_volatility_correlation(values: &[f64], t_max: usize) -> Result<LeverageCurve> {
    if t_max < 1 || values.len() <= t_max {
        return Err(Error::BadLagRange {
            len: values.len(),
            t_max,
        });
    }
    let mean_r = stats::mean(values);
    let mean_sq = values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64;
    let z = mean_sq * mean_sq;
    if z == 0.0 {
        return Err(Error::DegenerateSeries(
            "Z = <|r|^2>^2 vanishes".to_string(),
        ));
    }
    let l0 = mean_r * mean_sq;

    let mut lags = Vec::with_capacity(t_max);
    let mut out = Vec::with_capacity(t_max);
    let mut counts = Vec::with_capacity(t_max);
    for t in 1..=t_max {
        let n = values.len() - t;
        let mut acc = 0.0;
        for k in 0..n {
            let v = values[k + t];
            acc += values[k] * v * v;
        }
        lags.push(t);
        out.push((acc / n as f64 - l0) / z);
        counts.push(n);
    }
    Ok(LeverageCurve {
        lags,
        values: out,
        counts,
        fit: None,
    })
}

pub fn curve_for_series(series: &NormalizedSeries, t_max: usize) -> Result<LeverageCurve> {
    return_volatility_correlation(&series.values, t_max)
}

/// Smallest fit window accepted.
pub const MIN_FIT_POINTS: usize = 4;

/// Least-squares fit of c * exp(-t / tau) to L(t) over lags [lo, hi].
///
/// The fit runs on L(t) directly, not on log |L(t)|: noisy curves cross zero
/// and make log-space fitting ill-defined. For fixed tau the optimal c is
/// closed-form, so the search is one-dimensional in tau (coarse log-spaced
/// scan, then golden-section refinement).
pub fn exponential_fit(curve: &LeverageCurve, window: (usize, usize)) -> Result<ExpFit> {
    let (lo, hi) = window;
    let t_max = curve.t_max();
    if lo < 1 || hi > t_max || hi < lo || hi - lo + 1 < MIN_FIT_POINTS {
        return Err(Error::BadFitWindow {
            lo,
            hi,
            t_max,
            min_points: MIN_FIT_POINTS,
        });
    }
    let ts: Vec<f64> = (lo..=hi).map(|t| t as f64).collect();
    let ys: Vec<f64> = (lo..=hi).map(|t| curve.at(t)).collect();
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    if scale == 0.0 {
        return Err(Error::DegenerateFit(
            "curve is identically zero over the window; amplitude 0, decay undefined".to_string(),
        ));
    }

    // sum of squared residuals at the best c for this tau
    let sse_at = |tau: f64| -> (f64, f64) {
        let mut ee = 0.0;
        let mut ey = 0.0;
        for (t, y) in ts.iter().zip(&ys) {
            let e = (-t / tau).exp();
            ee += e * e;
            ey += e * y;
        }
        let c = if ee > 0.0 { ey / ee } else { 0.0 };
        let mut sse = 0.0;
        for (t, y) in ts.iter().zip(&ys) {
            let r = y - c * (-t / tau).exp();
            sse += r * r;
        }
        (sse, c)
    };

    let tau_lo: f64 = 0.05;
    let tau_hi = 50.0 * t_max as f64;
    let grid = 400usize;
    let log_lo = tau_lo.ln();
    let step = (tau_hi.ln() - log_lo) / (grid - 1) as f64;
    let mut best_k = 0usize;
    let mut best_sse = f64::INFINITY;
    for k in 0..grid {
        let (sse, _) = sse_at((log_lo + step * k as f64).exp());
        if sse < best_sse {
            best_sse = sse;
            best_k = k;
        }
    }
    let mut a = (log_lo + step * best_k.saturating_sub(1) as f64).exp();
    let mut b = (log_lo + step * (best_k + 1).min(grid - 1) as f64).exp();

    // golden-section refinement on [a, b]
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = sse_at(x1).0;
    let mut f2 = sse_at(x2).0;
    for _ in 0..200 {
        if (b - a) < 1e-12 * b {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = sse_at(x1).0;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = sse_at(x2).0;
        }
    }
    let tau = 0.5 * (a + b);
    let (sse, c) = sse_at(tau);
    if !c.is_finite() || !tau.is_finite() {
        return Err(Error::DegenerateFit(format!(
            "non-finite parameters (c = {c}, tau = {tau})"
        )));
    }
    Ok(ExpFit {
        amplitude: c,
        decay_days: tau,
        residual_norm: sse.sqrt(),
        window,
    })
}

/// Split a series at `boundary` (before: date < boundary, after: date >=
/// boundary) and re-normalize each side, since the moments in L(t) are per
/// analyzed window.
pub fn split_periods(
    series: &NormalizedSeries,
    boundary: NaiveDate,
) -> Result<(NormalizedSeries, NormalizedSeries)> {
    let split = series.dates.partition_point(|d| *d < boundary);
    if split == 0 || split == series.len() {
        return Err(Error::EmptySplit { boundary });
    }
    let before = normalize_values(
        &series.ticker,
        &series.dates[..split],
        &series.values[..split],
    )?;
    let after = normalize_values(
        &series.ticker,
        &series.dates[split..],
        &series.values[split..],
    )?;
    Ok((before, after))
}

/// Pointwise mean of curves sharing a lag axis; sample counts are summed.
pub fn average_curves(curves: &[LeverageCurve]) -> Result<LeverageCurve> {
    let first = curves.first().ok_or(Error::LagAxisMismatch)?;
    for c in curves {
        if c.lags != first.lags {
            return Err(Error::LagAxisMismatch);
        }
    }
    let k = curves.len() as f64;
    let values = (0..first.values.len())
        .map(|i| curves.iter().map(|c| c.values[i]).sum::<f64>() / k)
        .collect();
    let counts = (0..first.counts.len())
        .map(|i| curves.iter().map(|c| c.counts[i]).sum())
        .collect();
    Ok(LeverageCurve {
        lags: first.lags.clone(),
        values,
        counts,
        fit: None,
    })
}
