//! Seeded ground-truth generators: factor panels with planted (optionally
//! sign-split) sectors, volatility-feedback return series, and Pareto
//! samples. Every generator is a deterministic function of its config and
//! seed.

use chrono::{Datelike, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::ReturnPanel;
use crate::series::{normalize_values, NormalizedSeries};

/// Consecutive synthetic trading days (weekdays) starting 2003-01-06.
pub fn synthetic_dates(n: usize) -> Vec<NaiveDate> {
    let mut dates = Vec::with_capacity(n);
    let mut d = NaiveDate::from_ymd_opt(2003, 1, 6).unwrap();
    while dates.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(d);
        }
        d = d.succ_opt().unwrap();
    }
    dates
}

pub fn synthetic_ticker(i: usize) -> String {
    format!("S{i:03}")
}

/// A planted sector: member stocks with signed factor loadings. Members with
/// opposite loading signs form anti-correlated subsectors of one eigenmode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorSpec {
    pub label: String,
    /// (stock index, signed loading)
    pub members: Vec<(usize, f64)>,
}

impl SectorSpec {
    /// A sector on stocks [start, start+size) where the first half loads
    /// +loading and the second half -loading.
    pub fn signed_block(label: impl Into<String>, start: usize, size: usize, loading: f64) -> Self {
        let members = (0..size)
            .map(|k| {
                let sign = if k < size / 2 { 1.0 } else { -1.0 };
                (start + k, sign * loading)
            })
            .collect();
        Self {
            label: label.into(),
            members,
        }
    }

    /// A sector on stocks [start, start+size) with one common loading.
    pub fn block(label: impl Into<String>, start: usize, size: usize, loading: f64) -> Self {
        Self {
            label: label.into(),
            members: (0..size).map(|k| (start + k, loading)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorPanelConfig {
    pub n: usize,
    pub t: usize,
    /// per-stock market loadings (empty means no market factor)
    pub beta: Vec<f64>,
    pub sectors: Vec<SectorSpec>,
    pub noise_sigma: f64,
    /// Student-t degrees of freedom for heavy-tailed innovations; None keeps
    /// Gaussian innovations
    pub tail_dof: Option<f64>,
    pub seed: u64,
}

impl FactorPanelConfig {
    pub fn market_only(n: usize, t: usize, beta: f64, noise_sigma: f64, seed: u64) -> Self {
        Self {
            n,
            t,
            beta: vec![beta; n],
            sectors: Vec::new(),
            noise_sigma,
            tail_dof: None,
            seed,
        }
    }

    pub fn noise_only(n: usize, t: usize, seed: u64) -> Self {
        Self {
            n,
            t,
            beta: Vec::new(),
            sectors: Vec::new(),
            noise_sigma: 1.0,
            tail_dof: None,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 || self.t < 2 {
            return Err(Error::SynthConfig(format!(
                "need N, T >= 2, got N={}, T={}",
                self.n, self.t
            )));
        }
        if !self.beta.is_empty() && self.beta.len() != self.n {
            return Err(Error::SynthConfig(format!(
                "beta has {} entries for N={}",
                self.beta.len(),
                self.n
            )));
        }
        if !self.beta.iter().all(|b| b.is_finite()) {
            return Err(Error::SynthConfig("non-finite market loading".into()));
        }
        if self.noise_sigma <= 0.0 || self.noise_sigma.is_nan() {
            return Err(Error::SynthConfig("noise sigma must be positive".into()));
        }
        for s in &self.sectors {
            for &(i, g) in &s.members {
                if i >= self.n {
                    return Err(Error::SynthConfig(format!(
                        "sector {} references stock {} >= N={}",
                        s.label, i, self.n
                    )));
                }
                if !g.is_finite() {
                    return Err(Error::SynthConfig("non-finite sector loading".into()));
                }
            }
        }
        Ok(())
    }
}

/// Planted sector membership per stock, recorded by the generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StockAssignment {
    pub ticker: String,
    pub sector: Option<String>,
    /// signed sector loading; 0 when unassigned
    pub loading: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct GroundTruth {
    pub assignments: Vec<StockAssignment>,
}

impl GroundTruth {
    /// Members of `label` with positive / negative loadings.
    pub fn signed_members(&self, label: &str) -> (Vec<usize>, Vec<usize>) {
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (i, a) in self.assignments.iter().enumerate() {
            if a.sector.as_deref() == Some(label) {
                if a.loading > 0.0 {
                    pos.push(i);
                } else if a.loading < 0.0 {
                    neg.push(i);
                }
            }
        }
        (pos, neg)
    }

    pub fn sector_labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = Vec::new();
        for a in &self.assignments {
            if let Some(s) = &a.sector {
                if !labels.contains(s) {
                    labels.push(s.clone());
                }
            }
        }
        labels
    }
}

/// r_i(t) = beta_i m(t) + sum_s g_is f_s(t) + sigma_eps eps_i(t) with
/// independent standard-normal factors, rows normalized afterwards.
pub fn generate_factor_panel(config: &FactorPanelConfig) -> Result<(ReturnPanel, GroundTruth)> {
    config.validate()?;
    let mut rng = crate::rng::rng_from_seed(config.seed);
    let (n, t) = (config.n, config.t);

    let draw = |rng: &mut rand_chacha::ChaCha8Rng| -> f64 {
        match config.tail_dof {
            Some(dof) => StudentT::new(dof).expect("dof > 0").sample(rng),
            None => StandardNormal.sample(rng),
        }
    };

    let market: Option<Vec<f64>> = if config.beta.is_empty() {
        None
    } else {
        Some((0..t).map(|_| StandardNormal.sample(&mut rng)).collect())
    };
    let factors: Vec<Vec<f64>> = (0..config.sectors.len())
        .map(|_| (0..t).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();

    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut rng_i = crate::rng::rng_from_seed(crate::rng::derive_seed(config.seed, i as u64));
            (0..t)
                .map(|k| {
                    let mut v = config.noise_sigma * draw(&mut rng_i);
                    if let Some(m) = &market {
                        v += config.beta[i] * m[k];
                    }
                    v
                })
                .collect()
        })
        .collect();
    for (s, spec) in config.sectors.iter().enumerate() {
        for &(i, g) in &spec.members {
            for k in 0..t {
                rows[i][k] += g * factors[s][k];
            }
        }
    }

    let tickers: Vec<String> = (0..n).map(synthetic_ticker).collect();
    let panel = ReturnPanel::from_rows(tickers.clone(), synthetic_dates(t), rows)?;

    let mut assignments: Vec<StockAssignment> = tickers
        .into_iter()
        .map(|ticker| StockAssignment {
            ticker,
            sector: None,
            loading: 0.0,
        })
        .collect();
    for spec in &config.sectors {
        for &(i, g) in &spec.members {
            assignments[i].sector = Some(spec.label.clone());
            assignments[i].loading = g;
        }
    }
    Ok((panel, GroundTruth { assignments }))
}

/// Retarded volatility feedback: sigma(t) responds to exponentially weighted
/// past signed returns. Negative feedback plants the leverage effect,
/// positive feedback the anti-leverage effect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeverageConfig {
    pub t: usize,
    pub base_sigma: f64,
    /// feedback amplitude lambda_f; sign selects leverage vs anti-leverage
    pub feedback: f64,
    /// kernel decay time tau_f in days
    pub decay_days: f64,
    pub seed: u64,
}

/// Fraction of base volatility the feedback may not go below.
pub const VOLATILITY_FLOOR: f64 = 0.05;

/// r(t) = sigma(t) eta(t), sigma(t) = sigma0 * max(0.05, 1 + lambda_f * A(t))
/// with A(t) = sum_{t'<t} exp(-(t-t')/tau_f) r(t'); output re-normalized.
pub fn generate_leverage_series(config: &LeverageConfig) -> Result<NormalizedSeries> {
    if config.t < 2 {
        return Err(Error::SynthConfig("need T >= 2".into()));
    }
    if config.base_sigma <= 0.0
        || config.decay_days <= 0.0
        || config.base_sigma.is_nan()
        || config.decay_days.is_nan()
    {
        return Err(Error::SynthConfig(
            "base sigma and decay time must be positive".into(),
        ));
    }
    let mut rng = crate::rng::rng_from_seed(config.seed);
    let decay = (-1.0 / config.decay_days).exp();
    let mut acc = 0.0;
    let mut values = Vec::with_capacity(config.t);
    for _ in 0..config.t {
        let sigma = config.base_sigma * (1.0 + config.feedback * acc).max(VOLATILITY_FLOOR);
        let eta: f64 = StandardNormal.sample(&mut rng);
        let r = sigma * eta;
        values.push(r);
        acc = decay * (acc + r);
    }
    normalize_values("LEV", &synthetic_dates(config.t), &values)
}

/// Synthetic daily volumes: a geometric random walk around `base`, so the
/// log-volume changes are i.i.d. normal with step `sigma`.
pub fn generate_volume_series(n: usize, sigma: f64, base: f64, seed: u64) -> Vec<f64> {
    let mut rng = crate::rng::rng_from_seed(seed);
    let mut level = 0.0f64;
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            level += sigma * z;
            base * level.exp()
        })
        .collect()
}

/// Inverse-CDF Pareto sampling: x = x_min * u^(-1/(gamma-1)), u uniform (0,1].
/// `gamma` is the density exponent, f(x) ~ x^(-gamma).
pub fn generate_pareto_intervals(gamma: f64, x_min: f64, n: usize, seed: u64) -> Result<Vec<f64>> {
    if gamma <= 1.0 || gamma.is_nan() {
        return Err(Error::SynthConfig(format!(
            "tail exponent must exceed 1, got {gamma}"
        )));
    }
    if x_min <= 0.0 || x_min.is_nan() || n == 0 {
        return Err(Error::SynthConfig(
            "need x_min > 0 and at least one sample".into(),
        ));
    }
    let mut rng = crate::rng::rng_from_seed(seed);
    let exponent = -1.0 / (gamma - 1.0);
    Ok((0..n)
        .map(|_| {
            let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
            x_min * u.powf(exponent)
        })
        .collect())
}
