//! Recurrence intervals of volatility exceedances, scaling collapse,
//! power-law tail fitting and Kolmogorov-Smirnov validation.
//!
//! Intervals are waiting times (in days) between consecutive volatilities
//! strictly above a threshold. Scaled by their per-source mean they collapse
//! onto a threshold-independent distribution whose tail is fit by the
//! continuous maximum-likelihood power law
//!
//! ```text
//! gamma_hat = 1 + n / sum ln(x_i / x_min)      over x_i >= x_min
//! ```
//!
//! with `x_min` either fixed or chosen by KS-distance minimization over a
//! candidate grid. Fits are validated with a parametric bootstrap that
//! refits every synthetic replicate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::series::VolatilitySeries;

/// Recurrence intervals of one source series at one threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntervalSet {
    pub source: String,
    /// threshold the series was compared against, in the series' own units
    pub q: f64,
    /// 0-based position of the first exceedance, when any
    pub first_exceedance: Option<usize>,
    /// waiting times between consecutive exceedances, each >= 1
    pub intervals: Vec<u64>,
    /// set when fewer than 2 exceedances were found
    pub low_statistics: bool,
    pub n_exceedances: usize,
}

impl IntervalSet {
    pub fn mean_interval(&self) -> Option<f64> {
        if self.intervals.is_empty() {
            None
        } else {
            Some(self.intervals.iter().sum::<u64>() as f64 / self.intervals.len() as f64)
        }
    }
}

/// Extract recurrence intervals of values strictly above `q`.
pub fn recurrence_intervals(vol: &VolatilitySeries, q: f64) -> IntervalSet {
    recurrence_intervals_values(&vol.ticker, &vol.values, q)
}

pub fn recurrence_intervals_values(source: &str, values: &[f64], q: f64) -> IntervalSet {
    assert!(q > 0.0, "threshold must be positive");
    assert!(!values.is_empty(), "series must be nonempty");
    let exceedances: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > q)
        .map(|(t, _)| t)
        .collect();
    let intervals: Vec<u64> = exceedances
        .windows(2)
        .map(|w| (w[1] - w[0]) as u64)
        .collect();
    IntervalSet {
        source: source.to_string(),
        q,
        first_exceedance: exceedances.first().copied(),
        low_statistics: exceedances.len() < 2,
        n_exceedances: exceedances.len(),
        intervals,
    }
}

/// Pooled intervals scaled by their per-source mean.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PooledScaled {
    /// x = tau / <tau>, concatenated over qualifying sources
    pub samples: Vec<f64>,
    /// (source, <tau>) for each qualifying source
    pub per_source_means: Vec<(String, f64)>,
    pub n_skipped: usize,
}

/// Scale each set's intervals by that set's own mean and concatenate.
/// Sets with fewer than 2 intervals are skipped; pooling fails only when no
/// set qualifies.
pub fn pool_scaled(sets: &[IntervalSet]) -> Result<PooledScaled> {
    let mut samples = Vec::new();
    let mut per_source_means = Vec::new();
    let mut n_skipped = 0;
    for set in sets {
        if set.intervals.len() < 2 {
            n_skipped += 1;
            continue;
        }
        let mean = set.mean_interval().expect("nonempty");
        per_source_means.push((set.source.clone(), mean));
        samples.extend(set.intervals.iter().map(|&t| t as f64 / mean));
    }
    if per_source_means.is_empty() {
        return Err(Error::NothingToPool);
    }
    Ok(PooledScaled {
        samples,
        per_source_means,
        n_skipped,
    })
}

/// Logarithmic binning spec.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogBinSpec {
    pub bins_per_decade: usize,
    /// smallest sample count accepted
    pub min_samples: usize,
}

impl Default for LogBinSpec {
    fn default() -> Self {
        Self {
            bins_per_decade: 20,
            min_samples: 50,
        }
    }
}

/// Log-binned density estimate of scaled intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaledDistribution {
    /// bin edges, len = bins + 1
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// count / (bin width * n); integrates to 1 over the sampled support
    pub density: Vec<f64>,
    pub n: usize,
}

/// Log-spaced bin edges covering [lo, hi].
pub fn log_edges(lo: f64, hi: f64, bins_per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo);
    if hi == lo {
        // degenerate support: one narrow bin around the value
        return vec![lo * 0.9999995, lo * 1.0000005];
    }
    let decades = (hi / lo).log10();
    let bins = ((decades * bins_per_decade as f64).ceil() as usize).max(1);
    let step = decades / bins as f64;
    let mut edges: Vec<f64> = (0..=bins).map(|k| lo * 10f64.powf(step * k as f64)).collect();
    // guard the ends against rounding so min and max fall inside
    edges[0] = edges[0].min(lo);
    edges[bins] = edges[bins].max(hi);
    edges
}

/// Histogram samples onto the given edges as a density.
pub fn density_on_edges(samples: &[f64], edges: &[f64]) -> ScaledDistribution {
    let bins = edges.len() - 1;
    let mut counts = vec![0usize; bins];
    for &x in samples {
        if x < edges[0] || x > edges[bins] {
            continue;
        }
        // bins are right-open except the last
        let k = edges[1..bins].partition_point(|e| *e <= x);
        counts[k] += 1;
    }
    let n = samples.len();
    let density = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 / ((edges[k + 1] - edges[k]) * n as f64))
        .collect();
    ScaledDistribution {
        edges: edges.to_vec(),
        counts,
        density,
        n,
    }
}

/// Log-binned density of pooled scaled intervals.
pub fn scaled_distribution(samples: &[f64], spec: LogBinSpec) -> Result<ScaledDistribution> {
    if samples.len() < spec.min_samples {
        return Err(Error::TooFewSamples {
            min: spec.min_samples,
            got: samples.len(),
        });
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(0.0f64, f64::max);
    assert!(lo > 0.0, "scaled intervals are positive");
    let edges = log_edges(lo, hi, spec.bins_per_decade);
    Ok(density_on_edges(samples, &edges))
}

/// How the tail cutoff x_min is chosen.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub enum XminPolicy {
    Fixed(f64),
    /// minimize the KS distance over up to `candidates` cutoffs spaced by
    /// rank between the smallest sample and the largest cutoff leaving a
    /// full tail
    Scan { candidates: usize },
}

/// Smallest tail accepted by the power-law fit.
pub const MIN_TAIL_SAMPLES: usize = 50;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerLawFit {
    /// density exponent: f(x) ~ x^(-gamma)
    pub gamma: f64,
    pub x_min: f64,
    /// KS distance between the tail and the fitted law
    pub ks: f64,
    pub n_tail: usize,
}

fn pareto_cdf(x: f64, gamma: f64, x_min: f64) -> f64 {
    1.0 - (x / x_min).powf(-(gamma - 1.0))
}

/// KS distance of sorted tail samples against the fitted Pareto CDF.
fn ks_distance_sorted(sorted_tail: &[f64], gamma: f64, x_min: f64) -> f64 {
    let n = sorted_tail.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted_tail.iter().enumerate() {
        let f = pareto_cdf(x, gamma, x_min);
        d = d.max(((i + 1) as f64 / n - f).abs());
        d = d.max((f - i as f64 / n).abs());
    }
    d
}

fn mle_gamma_sorted(sorted_tail: &[f64], x_min: f64) -> f64 {
    let n = sorted_tail.len() as f64;
    let log_sum: f64 = sorted_tail.iter().map(|&x| (x / x_min).ln()).sum();
    1.0 + n / log_sum
}

/// Continuous maximum-likelihood power-law fit of the sample tail.
pub fn powerlaw_fit(samples: &[f64], policy: XminPolicy) -> Result<PowerLawFit> {
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    match policy {
        XminPolicy::Fixed(x_min) => fit_at(&sorted, x_min),
        XminPolicy::Scan { candidates } => {
            if sorted.len() < MIN_TAIL_SAMPLES {
                return Err(Error::TooFewSamples {
                    min: MIN_TAIL_SAMPLES,
                    got: sorted.len(),
                });
            }
            let hi_rank = sorted.len() - MIN_TAIL_SAMPLES;
            let k = candidates.max(2).min(hi_rank + 1);
            let mut best: Option<PowerLawFit> = None;
            for c in 0..k {
                let rank = c * hi_rank / (k - 1);
                let x_min = sorted[rank];
                if x_min <= 0.0 {
                    continue;
                }
                let fit = fit_at(&sorted, x_min)?;
                if best.as_ref().is_none_or(|b| fit.ks < b.ks) {
                    best = Some(fit);
                }
            }
            best.ok_or_else(|| Error::PowerLawFit("no usable x_min candidate".to_string()))
        }
    }
}

fn fit_at(sorted: &[f64], x_min: f64) -> Result<PowerLawFit> {
    if x_min <= 0.0 || x_min.is_nan() {
        return Err(Error::PowerLawFit(format!("x_min must be positive, got {x_min}")));
    }
    let start = sorted.partition_point(|&x| x < x_min);
    let tail = &sorted[start..];
    if tail.len() < MIN_TAIL_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_TAIL_SAMPLES,
            got: tail.len(),
        });
    }
    let gamma = mle_gamma_sorted(tail, x_min);
    if !gamma.is_finite() || gamma <= 1.0 {
        return Err(Error::PowerLawFit(format!(
            "estimated exponent {gamma} is not a normalizable tail"
        )));
    }
    Ok(PowerLawFit {
        gamma,
        x_min,
        ks: ks_distance_sorted(tail, gamma, x_min),
        n_tail: tail.len(),
    })
}

/// Discrete maximum-likelihood approximation for integer intervals,
/// gamma = 1 + n / sum ln(tau_i / (x_min - 1/2)); provided for sensitivity
/// checks against the continuous fit.
pub fn discrete_mle_gamma(intervals: &[u64], x_min: u64) -> Result<f64> {
    assert!(x_min >= 1);
    let tail: Vec<f64> = intervals
        .iter()
        .filter(|&&t| t >= x_min)
        .map(|&t| t as f64)
        .collect();
    if tail.len() < MIN_TAIL_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_TAIL_SAMPLES,
            got: tail.len(),
        });
    }
    let shift = x_min as f64 - 0.5;
    let log_sum: f64 = tail.iter().map(|&t| (t / shift).ln()).sum();
    Ok(1.0 + tail.len() as f64 / log_sum)
}

/// Minimum bootstrap replicate count.
pub const MIN_BOOTSTRAP: usize = 100;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
    pub n_tail: usize,
    pub n_boot: usize,
}

/// Parametric bootstrap p-value for the power-law tail fit.
///
/// The observed KS distance of the tail (x >= x_min) against
/// Pareto(gamma, x_min) is compared with replicates drawn from the fitted
/// law, each refit by MLE before its own KS distance is taken; p is the
/// fraction of replicates at least as extreme, with the usual +1 smoothing.
pub fn ks_test(
    samples: &[f64],
    gamma: f64,
    x_min: f64,
    n_boot: usize,
    seed: u64,
) -> Result<KsTest> {
    if n_boot < MIN_BOOTSTRAP {
        return Err(Error::TooFewSamples {
            min: MIN_BOOTSTRAP,
            got: n_boot,
        });
    }
    let mut tail: Vec<f64> = samples.iter().copied().filter(|&x| x >= x_min).collect();
    tail.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    if tail.len() < MIN_TAIL_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_TAIL_SAMPLES,
            got: tail.len(),
        });
    }
    let observed = ks_distance_sorted(&tail, gamma, x_min);
    let n = tail.len();
    let exponent = -1.0 / (gamma - 1.0);
    let mut exceed = 0usize;
    for b in 0..n_boot {
        let mut rng = rng_from_seed(derive_seed(seed, b as u64));
        let mut replicate: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = 1.0 - rand::Rng::gen::<f64>(&mut rng);
                x_min * u.powf(exponent)
            })
            .collect();
        replicate.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let g = mle_gamma_sorted(&replicate, x_min);
        if ks_distance_sorted(&replicate, g, x_min) >= observed {
            exceed += 1;
        }
    }
    Ok(KsTest {
        statistic: observed,
        p_value: (exceed + 1) as f64 / (n_boot + 1) as f64,
        n_tail: n,
        n_boot,
    })
}

/// Bootstrap KS p-value against an exponential with MLE rate; the
/// null-model diagnostic for interval distributions of i.i.d. volatilities.
pub fn exponential_ks_pvalue(samples: &[f64], n_boot: usize, seed: u64) -> Result<KsTest> {
    if n_boot < MIN_BOOTSTRAP {
        return Err(Error::TooFewSamples {
            min: MIN_BOOTSTRAP,
            got: n_boot,
        });
    }
    if samples.len() < MIN_TAIL_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_TAIL_SAMPLES,
            got: samples.len(),
        });
    }
    let ks_exp = |sorted: &[f64]| -> f64 {
        let mean = crate::stats::mean(sorted);
        let n = sorted.len() as f64;
        let mut d = 0.0f64;
        for (i, &x) in sorted.iter().enumerate() {
            let f = 1.0 - (-x / mean).exp();
            d = d.max(((i + 1) as f64 / n - f).abs());
            d = d.max((f - i as f64 / n).abs());
        }
        d
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let observed = ks_exp(&sorted);
    let mean = crate::stats::mean(&sorted);
    let n = sorted.len();
    let mut exceed = 0usize;
    for b in 0..n_boot {
        let mut rng = rng_from_seed(derive_seed(seed, b as u64));
        let mut replicate: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = 1.0 - rand::Rng::gen::<f64>(&mut rng);
                -mean * u.ln()
            })
            .collect();
        replicate.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        if ks_exp(&replicate) >= observed {
            exceed += 1;
        }
    }
    Ok(KsTest {
        statistic: observed,
        p_value: (exceed + 1) as f64 / (n_boot + 1) as f64,
        n_tail: n,
        n_boot,
    })
}
