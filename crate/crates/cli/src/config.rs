//! Run configuration. One JSON file drives every subcommand; the pipeline
//! writes the fully resolved configuration back out as the run manifest, so
//! any run can be reproduced from its manifest alone.

use std::path::PathBuf;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use smkt_core::recurrence::XminPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Crosscorr,
    Sectors,
    Leverage,
    Recurrence,
}

fn default_analyses() -> Vec<Analysis> {
    vec![
        Analysis::Crosscorr,
        Analysis::Sectors,
        Analysis::Leverage,
        Analysis::Recurrence,
    ]
}

fn default_u_c_grid() -> Vec<f64> {
    vec![0.06, 0.08, 0.10, 0.12]
}

fn default_q_grid() -> Vec<f64> {
    vec![2.0, 3.0, 4.0, 5.0]
}

fn default_t_max() -> usize {
    40
}

fn default_fit_window() -> (usize, usize) {
    (1, 20)
}

fn default_boundary() -> Option<NaiveDate> {
    NaiveDate::from_ymd_opt(2000, 1, 1)
}

fn default_alpha_max() -> usize {
    60
}

fn default_n_samples() -> usize {
    200
}

fn default_n_boot() -> usize {
    200
}

fn default_table_modes() -> usize {
    8
}

fn default_floor() -> f64 {
    smkt_core::sectors::DEFAULT_IDENTIFICATION_FLOOR
}

fn default_scan_u_c() -> f64 {
    0.08
}

fn default_delta_t() -> usize {
    1
}

fn default_bins_per_decade() -> usize {
    20
}

fn default_cij_bins() -> usize {
    50
}

/// Serializable x_min policy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum XminPolicyConfig {
    Fixed { x_min: f64 },
    Scan { candidates: usize },
}

impl Default for XminPolicyConfig {
    fn default() -> Self {
        XminPolicyConfig::Scan { candidates: 100 }
    }
}

impl From<XminPolicyConfig> for XminPolicy {
    fn from(c: XminPolicyConfig) -> Self {
        match c {
            XminPolicyConfig::Fixed { x_min } => XminPolicy::Fixed(x_min),
            XminPolicyConfig::Scan { candidates } => XminPolicy::Scan { candidates },
        }
    }
}

/// Planted sector block for the synthetic generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorBlockConfig {
    pub label: String,
    pub start: usize,
    pub size: usize,
    pub loading: f64,
    /// split the block into +/- loaded halves
    #[serde(default)]
    pub signed: bool,
}

fn default_price_scale() -> f64 {
    0.02
}

fn default_volume_sigma() -> f64 {
    0.3
}

fn default_base_volume() -> f64 {
    1.0e6
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IndexLeverageConfig {
    /// feedback amplitude; negative plants leverage, positive anti-leverage
    pub feedback: f64,
    pub decay_days: f64,
}

/// Config for `smkt synth`: a factor panel plus an optional
/// volatility-feedback index series, emitted in the ingestion CSV format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub t: usize,
    pub market_beta: f64,
    #[serde(default)]
    pub sectors: Vec<SectorBlockConfig>,
    pub noise_sigma: f64,
    /// daily log-return scale used to turn normalized returns into prices
    #[serde(default = "default_price_scale")]
    pub price_scale: f64,
    /// step of the log-volume random walk
    #[serde(default = "default_volume_sigma")]
    pub volume_sigma: f64,
    #[serde(default = "default_base_volume")]
    pub base_volume: f64,
    #[serde(default)]
    pub index_leverage: Option<IndexLeverageConfig>,
    /// generation seed; defaults to the run seed
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// market CSVs, schema `date,ticker,close,volume` with `IDX:` tickers
    /// for index series
    #[serde(default)]
    pub inputs: Vec<PathBuf>,
    /// optional `ticker,sector_label` CSV
    #[serde(default)]
    pub labels: Option<PathBuf>,
    /// stages run by `smkt report`
    #[serde(default = "default_analyses")]
    pub analyses: Vec<Analysis>,
    /// every randomized step derives its stream from this seed
    pub seed: u64,

    #[serde(default = "default_delta_t")]
    pub delta_t: usize,
    #[serde(default = "default_cij_bins")]
    pub cij_bins: usize,
    /// lambda_max stability sweep: prefix lengths of the time axis
    #[serde(default)]
    pub t_sweep: Option<Vec<usize>>,

    #[serde(default = "default_u_c_grid")]
    pub u_c_grid: Vec<f64>,
    #[serde(default = "default_table_modes")]
    pub table_modes: usize,
    #[serde(default = "default_floor")]
    pub identification_floor: f64,
    #[serde(default = "default_alpha_max")]
    pub alpha_max: usize,
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    /// threshold used by the anti-correlation scan
    #[serde(default = "default_scan_u_c")]
    pub scan_u_c: f64,

    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default = "default_fit_window")]
    pub fit_window: (usize, usize),
    /// period split for the leverage stage; null disables the split
    #[serde(default = "default_boundary")]
    pub boundary_date: Option<NaiveDate>,
    /// index tickers to analyze; empty means every `IDX:` series found
    #[serde(default)]
    pub index_tickers: Vec<String>,

    #[serde(default = "default_q_grid")]
    pub q_grid: Vec<f64>,
    #[serde(default = "default_bins_per_decade")]
    pub bins_per_decade: usize,
    #[serde(default)]
    pub x_min_policy: XminPolicyConfig,
    #[serde(default = "default_n_boot")]
    pub n_boot: usize,

    #[serde(default)]
    pub synth: Option<SynthConfig>,
}

impl RunConfig {
    pub fn from_file(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| format!("invalid config {}: {e}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.u_c_grid.is_empty() {
            return Err("u_c_grid must be nonempty".into());
        }
        if self.q_grid.is_empty() {
            return Err("q_grid must be nonempty".into());
        }
        if self.u_c_grid.iter().any(|&u| u <= 0.0) {
            return Err("u_c_grid entries must be positive".into());
        }
        if self.q_grid.iter().any(|&q| q <= 0.0) {
            return Err("q_grid entries must be positive".into());
        }
        if self.t_max < 1 {
            return Err("t_max must be at least 1".into());
        }
        if self.delta_t < 1 {
            return Err("delta_t must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"seed": 7}"#).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.u_c_grid, vec![0.06, 0.08, 0.10, 0.12]);
        assert_eq!(c.q_grid, vec![2.0, 3.0, 4.0, 5.0]);
        assert_eq!(c.t_max, 40);
        assert_eq!(c.analyses.len(), 4);
        assert_eq!(
            c.boundary_date,
            NaiveDate::from_ymd_opt(2000, 1, 1)
        );
        assert!(matches!(
            c.x_min_policy,
            XminPolicyConfig::Scan { candidates: 100 }
        ));
    }

    #[test]
    fn null_boundary_disables_split() {
        let c: RunConfig =
            serde_json::from_str(r#"{"seed": 1, "boundary_date": null}"#).unwrap();
        assert!(c.boundary_date.is_none());
    }

    #[test]
    fn round_trips_through_json() {
        let c: RunConfig = serde_json::from_str(r#"{"seed": 3}"#).unwrap();
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), serde_json::to_string(&c).unwrap());
    }

    #[test]
    fn grid_validation() {
        let mut c: RunConfig = serde_json::from_str(r#"{"seed": 1}"#).unwrap();
        c.u_c_grid.clear();
        assert!(c.validate().is_err());
    }
}
