//! Sign-split subsector detection on deviating eigenvectors, sector labeling
//! and the subsector anti-correlation statistic.
//!
//! For mode alpha, stocks with |u_i| >= u_c form its sector; the sign of u_i
//! splits it into the positive and negative subsectors. The combinations
//! I+(t) and I-(t) of the two subsectors' returns are compared through
//! C_+- = <I+(t) I-(t)> against a baseline where the same weights land on
//! random disjoint stock sets, and the gap is summarized by
//! D = (C_rand - C_real) / (C_rand + C_real).
//!
//! The negative-subsector combination is taken long (weights |u_i|), so a
//! genuinely anti-correlated pair shows up as C_real *below* the random
//! baseline. D is invariant under the alternative raw-weight convention,
//! which flips the sign of both C_real and C_rand.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::crosscorr::CorrelationSpectrum;
use crate::error::{Error, Result};
use crate::panel::ReturnPanel;
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsectorMember {
    pub index: usize,
    pub ticker: String,
    /// raw eigenvector component u_i (signed)
    pub weight: f64,
}

/// The sign-split membership of one eigenmode at threshold u_c.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubsectorPartition {
    pub alpha: usize,
    pub u_c: f64,
    /// members with u_i >= u_c
    pub positive: Vec<SubsectorMember>,
    /// members with u_i <= -u_c
    pub negative: Vec<SubsectorMember>,
    /// set when the mode's eigenvalue is degenerate, making the split
    /// basis-dependent
    pub basis_dependent: bool,
    pub warnings: Vec<String>,
}

/// Threshold stocks of mode `alpha` by |u_i| >= u_c and split them by sign.
///
/// Mode 0 is the market mode and is rejected unless `allow_market_mode` is
/// set. A u_c at or below the random-matrix component level 1/sqrt(N), or a
/// threshold so high that both sides are empty, produces a warning rather
/// than an error.
pub fn select_subsectors(
    spectrum: &CorrelationSpectrum,
    tickers: &[String],
    alpha: usize,
    u_c: f64,
    allow_market_mode: bool,
) -> Result<SubsectorPartition> {
    if u_c <= 0.0 || u_c.is_nan() {
        return Err(Error::NonPositiveThreshold(u_c));
    }
    let n = spectrum.n();
    assert_eq!(tickers.len(), n, "ticker axis does not match spectrum");
    if alpha >= n {
        return Err(Error::IndexOutOfRange { index: alpha, len: n });
    }
    if alpha == 0 && !allow_market_mode {
        return Err(Error::MarketModeExcluded);
    }

    let mut partition = SubsectorPartition {
        alpha,
        u_c,
        positive: Vec::new(),
        negative: Vec::new(),
        basis_dependent: spectrum.degenerate[alpha],
        warnings: Vec::new(),
    };
    for (i, ticker) in tickers.iter().enumerate() {
        let u = spectrum.component(alpha, i);
        let member = SubsectorMember {
            index: i,
            ticker: ticker.clone(),
            weight: u,
        };
        if u >= u_c {
            partition.positive.push(member);
        } else if u <= -u_c {
            partition.negative.push(member);
        }
    }

    let random_level = 1.0 / (n as f64).sqrt();
    if u_c <= random_level {
        partition.warnings.push(format!(
            "u_c = {u_c} is at or below the random-matrix component level 1/sqrt(N) = {random_level:.4}"
        ));
    }
    if partition.positive.is_empty() && partition.negative.is_empty() {
        partition
            .warnings
            .push(format!("u_c = {u_c} leaves both subsectors empty"));
    }
    if partition.basis_dependent {
        partition.warnings.push(format!(
            "mode {alpha} has a degenerate eigenvalue; the subsector split is basis-dependent"
        ));
    }
    Ok(partition)
}

/// Label attached to one side of a partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SideLabel {
    /// no members passed the threshold
    Empty,
    /// no label reached the identification floor
    Null { size: usize },
    Identified {
        label: String,
        matched: usize,
        size: usize,
    },
}

impl SideLabel {
    pub fn fraction(&self) -> Option<f64> {
        match self {
            SideLabel::Identified { matched, size, .. } => Some(*matched as f64 / *size as f64),
            _ => None,
        }
    }
}

/// Default plurality fraction below which a side is reported as Null.
pub const DEFAULT_IDENTIFICATION_FLOOR: f64 = 0.40;

/// Key under which tickers missing from the label map are counted.
const UNLABELED: &str = "(unlabeled)";

/// Plurality label of a subsector side; ties break lexicographically. The
/// side is Null when the plurality falls below `floor` or when the plurality
/// class is the unlabeled one.
pub fn label_subsector(
    members: &[SubsectorMember],
    labels: &BTreeMap<String, String>,
    floor: f64,
) -> SideLabel {
    if members.is_empty() {
        return SideLabel::Empty;
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for m in members {
        let label = labels.get(&m.ticker).map(|s| s.as_str()).unwrap_or(UNLABELED);
        *counts.entry(label).or_insert(0) += 1;
    }
    // BTreeMap iterates in lexicographic order, so keeping strict maxima
    // breaks ties toward the smaller label.
    let (mut best_label, mut best_count) = ("", 0usize);
    for (label, count) in &counts {
        if *count > best_count {
            best_label = label;
            best_count = *count;
        }
    }
    let size = members.len();
    if best_label == UNLABELED || (best_count as f64 / size as f64) < floor {
        SideLabel::Null { size }
    } else {
        SideLabel::Identified {
            label: best_label.to_string(),
            matched: best_count,
            size,
        }
    }
}

/// Weighted per-day combination of panel rows: I(t) = sum_i w_i r_i(t).
pub fn subsector_return(panel: &ReturnPanel, weights: &[(String, f64)]) -> Result<Vec<f64>> {
    let mut indexed = Vec::with_capacity(weights.len());
    for (ticker, w) in weights {
        let i = panel
            .ticker_index(ticker)
            .ok_or_else(|| Error::UnknownTicker(ticker.clone()))?;
        indexed.push((i, *w));
    }
    Ok(combination(panel, &indexed))
}

fn combination(panel: &ReturnPanel, weights: &[(usize, f64)]) -> Vec<f64> {
    let t = panel.n_days();
    let mut out = vec![0.0; t];
    for &(i, w) in weights {
        for (k, o) in out.iter_mut().enumerate() {
            *o += w * panel.returns[(i, k)];
        }
    }
    out
}

/// C_+- = <I+(t) I-(t)>: plain time average of the product, no re-normalization.
pub fn cross_subsector_correlation(i_plus: &[f64], i_minus: &[f64]) -> f64 {
    assert_eq!(i_plus.len(), i_minus.len(), "combinations differ in length");
    let t = i_plus.len() as f64;
    i_plus
        .iter()
        .zip(i_minus)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / t
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Baseline {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
}

/// Minimum baseline sample count.
pub const MIN_BASELINE_SAMPLES: usize = 30;

/// Re-draw the two subsectors as uniformly random disjoint stock sets of the
/// same sizes, keeping the weight multisets, and average C_+- over draws.
/// Per-sample seeds derive from (seed, sample index), so the result does not
/// depend on evaluation order. The two weight sets are ordered canonically
/// before sampling, making the baseline exactly symmetric under a side swap.
pub fn random_baseline(
    panel: &ReturnPanel,
    pos_weights: &[f64],
    neg_weights: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<Baseline> {
    if n_samples < MIN_BASELINE_SAMPLES {
        return Err(Error::NotEnoughSamples {
            min: MIN_BASELINE_SAMPLES,
            got: n_samples,
        });
    }
    let n = panel.n_stocks();
    let (mut pos_weights, mut neg_weights) = (pos_weights, neg_weights);
    let key = |w: &[f64]| (w.len(), w.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    if key(neg_weights) < key(pos_weights) {
        std::mem::swap(&mut pos_weights, &mut neg_weights);
    }
    let (p, q) = (pos_weights.len(), neg_weights.len());
    if p + q > n {
        return Err(Error::SideSizesExceedPanel { pos: p, neg: q, n });
    }
    let mut values = Vec::with_capacity(n_samples);
    let mut indices: Vec<usize> = (0..n).collect();
    for k in 0..n_samples {
        let mut rng = rng_from_seed(derive_seed(seed, k as u64));
        // partial Fisher-Yates: the first p+q entries are a uniform draw of
        // distinct stocks
        for i in 0..(p + q) {
            let j = rand::Rng::gen_range(&mut rng, i..n);
            indices.swap(i, j);
        }
        let pos: Vec<(usize, f64)> = indices[..p]
            .iter()
            .zip(pos_weights)
            .map(|(&i, &w)| (i, w))
            .collect();
        let neg: Vec<(usize, f64)> = indices[p..p + q]
            .iter()
            .zip(neg_weights)
            .map(|(&i, &w)| (i, w))
            .collect();
        let i_plus = combination(panel, &pos);
        let i_minus = combination(panel, &neg);
        values.push(cross_subsector_correlation(&i_plus, &i_minus));
        indices.sort_unstable(); // restore for the next draw
    }
    let (mean, stderr) = stats::mean_and_stderr(&values);
    Ok(Baseline {
        mean,
        stderr,
        n_samples,
    })
}

/// D = (C_rand - C_real) / (C_rand + C_real); positive D marks genuine
/// anti-correlation between the subsectors.
pub fn relative_difference(c_rand: f64, c_real: f64) -> Result<f64> {
    let den = c_rand + c_real;
    if den == 0.0 {
        return Err(Error::UndefinedD { c_rand, c_real });
    }
    Ok((c_rand - c_real) / den)
}

/// Per-mode anti-correlation summary. `c_real`, `c_rand` and `d` are None
/// when a side is empty (nothing to correlate) or when D's denominator
/// vanishes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeAntiCorrelation {
    pub alpha: usize,
    pub lambda: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub c_real: Option<f64>,
    pub c_rand: Option<f64>,
    pub c_rand_stderr: Option<f64>,
    pub d: Option<f64>,
    /// delta-method propagation of the baseline standard error through D
    pub d_stderr: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AntiCorrelationReport {
    pub u_c: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub modes: Vec<ModeAntiCorrelation>,
}

/// Run the C_+- / baseline / D comparison for modes 1..=alpha_max.
pub fn anti_correlation_scan(
    panel: &ReturnPanel,
    spectrum: &CorrelationSpectrum,
    u_c: f64,
    alpha_max: usize,
    n_samples: usize,
    seed: u64,
) -> Result<AntiCorrelationReport> {
    let n = spectrum.n();
    if alpha_max >= n {
        return Err(Error::IndexOutOfRange {
            index: alpha_max,
            len: n,
        });
    }
    let mut modes = Vec::with_capacity(alpha_max);
    for alpha in 1..=alpha_max {
        let partition = select_subsectors(spectrum, &panel.tickers, alpha, u_c, false)?;
        let mut entry = ModeAntiCorrelation {
            alpha,
            lambda: spectrum.eigenvalues[alpha],
            n_pos: partition.positive.len(),
            n_neg: partition.negative.len(),
            c_real: None,
            c_rand: None,
            c_rand_stderr: None,
            d: None,
            d_stderr: None,
        };
        if !partition.positive.is_empty() && !partition.negative.is_empty() {
            let pos: Vec<(usize, f64)> = partition
                .positive
                .iter()
                .map(|m| (m.index, m.weight))
                .collect();
            // negative subsector taken long: weights |u_i|
            let neg: Vec<(usize, f64)> = partition
                .negative
                .iter()
                .map(|m| (m.index, m.weight.abs()))
                .collect();
            let i_plus = combination(panel, &pos);
            let i_minus = combination(panel, &neg);
            let c_real = cross_subsector_correlation(&i_plus, &i_minus);
            let pos_w: Vec<f64> = pos.iter().map(|&(_, w)| w).collect();
            let neg_w: Vec<f64> = neg.iter().map(|&(_, w)| w).collect();
            let baseline = random_baseline(
                panel,
                &pos_w,
                &neg_w,
                n_samples,
                derive_seed(seed, alpha as u64),
            )?;
            entry.c_real = Some(c_real);
            entry.c_rand = Some(baseline.mean);
            entry.c_rand_stderr = Some(baseline.stderr);
            if let Ok(d) = relative_difference(baseline.mean, c_real) {
                let den = baseline.mean + c_real;
                entry.d = Some(d);
                entry.d_stderr = Some((2.0 * c_real / (den * den)).abs() * baseline.stderr);
            }
        }
        modes.push(entry);
    }
    Ok(AntiCorrelationReport {
        u_c,
        n_samples,
        seed,
        modes,
    })
}
