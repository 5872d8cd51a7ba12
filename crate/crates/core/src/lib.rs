//! Statistical analysis of daily stock-market panels.
//!
//! The crate covers four strands of analysis plus the synthetic generators
//! that make them testable without proprietary market data:
//!
//! - [`series`] / [`panel`]: log-returns, normalization, volatilities and
//!   panel alignment across tickers.
//! - [`crosscorr`]: the equal-time cross-correlation matrix, its spectrum and
//!   the analytic Wishart (Marchenko-Pastur) null used to screen it.
//! - [`sectors`]: sign-split subsector detection on deviating eigenvectors,
//!   sector labeling and the subsector anti-correlation statistic `D`.
//! - [`leverage`]: the return-volatility correlation function `L(t)`, its
//!   exponential fits and period splitting.
//! - [`recurrence`]: recurrence intervals of volatility exceedances, scaling
//!   collapse, power-law tail fits and Kolmogorov-Smirnov validation.
//! - [`synth`]: seeded generators with planted ground truth (factor panels,
//!   volatility-feedback series, Pareto samples).
//!
//! All randomized routines take explicit seeds and are deterministic for a
//! fixed seed.

pub mod crosscorr;
pub mod error;
pub mod leverage;
pub mod panel;
pub mod recurrence;
pub mod rng;
pub mod sectors;
pub mod series;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use panel::{align_panel, AlignPolicy, AlignmentReport, ReturnPanel};
pub use series::{DailySeries, NormalizedSeries, RawReturnSeries, VolatilitySeries};
