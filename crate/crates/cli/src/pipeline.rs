//! Stage orchestration and artifact emission.
//!
//! `run_pipeline` executes the configured analyses over ingested CSVs and
//! writes plot data (TSV) and reports (JSON) plus a manifest holding the
//! fully resolved configuration. A stage failure aborts the run with a
//! stage-tagged error and removes every file the run had written. All
//! computation is single-threaded and seeded, so a rerun from the manifest
//! reproduces every output byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate, Weekday};
use serde::Serialize;
use thiserror::Error;

use smkt_core::crosscorr::{
    cij_histogram, correlation_matrix, deviating_modes, eigendecompose, CorrelationSpectrum,
    SpectrumJson,
};
use smkt_core::leverage::{
    average_curves, curve_for_series, exponential_fit, split_periods, ExpFit, LeverageCurve,
};
use smkt_core::panel::{align_panel, AlignPolicy, ReturnPanel};
use smkt_core::recurrence::{
    ks_test, pool_scaled, powerlaw_fit, recurrence_intervals_values, scaled_distribution,
    IntervalSet, LogBinSpec, XminPolicy,
};
use smkt_core::rng::derive_seed;
use smkt_core::sectors::{anti_correlation_scan, label_subsector, select_subsectors, SideLabel};
use smkt_core::series::{log_returns, normalize, volatility, volume_returns, DailySeries};
use smkt_core::stats;
use smkt_core::synth::{
    generate_factor_panel, generate_leverage_series, generate_volume_series, FactorPanelConfig,
    LeverageConfig, SectorSpec,
};

use crate::config::{Analysis, IndexLeverageConfig, RunConfig, SynthConfig};
use crate::ingest::{ingest_csv, ingest_labels, CsvKind, INDEX_PREFIX};

pub use crate::config::Analysis as Stage;

#[derive(Debug, Error)]
#[error("[{stage}] {message}")]
pub struct PipelineError {
    pub stage: String,
    pub message: String,
}

fn err(stage: &str, message: impl ToString) -> PipelineError {
    PipelineError {
        stage: stage.to_string(),
        message: message.to_string(),
    }
}

type Result<T> = std::result::Result<T, PipelineError>;

/// Files written by a run, removed together when a stage fails.
struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> std::io::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, content)?;
        self.files.push(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }

    fn cleanup(&self) {
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
    }

    fn names(&self) -> Vec<String> {
        self.files
            .iter()
            .map(|f| f.file_name().unwrap().to_string_lossy().into_owned())
            .collect()
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub files: Vec<String>,
    pub warnings: Vec<String>,
}

fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_else(|| "nan".to_string())
}

fn format_q(q: f64) -> String {
    if q.fract() == 0.0 {
        format!("{}", q as i64)
    } else {
        format!("{q}")
    }
}

fn sanitize(ticker: &str) -> String {
    ticker
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn prev_weekday(date: NaiveDate) -> NaiveDate {
    let mut d = date.pred_opt().unwrap();
    while matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
        d = d.pred_opt().unwrap();
    }
    d
}

// ---------------------------------------------------------------------------
// data preparation shared by the analysis stages

struct Prepared {
    panel: ReturnPanel,
    correlation: smkt_core::crosscorr::CorrelationMatrix,
    spectrum: CorrelationSpectrum,
    excluded: Vec<(String, String)>,
    shared_days: usize,
}

fn prepare_panel(config: &RunConfig) -> Result<Prepared> {
    const STAGE: &str = "ingest";
    if config.inputs.is_empty() {
        return Err(err(STAGE, "no input CSVs configured"));
    }
    let mut daily: Vec<DailySeries> = Vec::new();
    for path in &config.inputs {
        let report = ingest_csv(path, CsvKind::Price).map_err(|e| err(STAGE, e))?;
        daily.extend(report.series);
    }
    let mut normalized = Vec::new();
    let mut excluded = Vec::new();
    for series in daily {
        let ticker = series.ticker.clone();
        match log_returns(&series, config.delta_t).and_then(|r| normalize(&r)) {
            Ok(n) => normalized.push(n),
            Err(e) => excluded.push((ticker, e.to_string())),
        }
    }
    if normalized.len() < 2 {
        return Err(err(
            STAGE,
            format!(
                "only {} usable return series ({} excluded)",
                normalized.len(),
                excluded.len()
            ),
        ));
    }
    let (panel, align_report) =
        align_panel(&normalized, AlignPolicy::Intersection).map_err(|e| err(STAGE, e))?;
    let correlation = correlation_matrix(&panel);
    let spectrum =
        eigendecompose(&correlation, panel.n_days()).map_err(|e| err("crosscorr", e))?;
    Ok(Prepared {
        panel,
        correlation,
        spectrum,
        excluded,
        shared_days: align_report.shared_days,
    })
}

// ---------------------------------------------------------------------------
// crosscorr stage

#[derive(Serialize)]
struct CrosscorrSummary {
    n: usize,
    t: usize,
    q: f64,
    lambda_min_ran: f64,
    lambda_max_ran: f64,
    mean_cij: f64,
    lambda_max: f64,
    lambda_min: f64,
    n_deviating: usize,
    deviating_modes: Vec<usize>,
    shared_days: usize,
    excluded: Vec<(String, String)>,
}

fn stage_crosscorr(
    config: &RunConfig,
    prepared: &Prepared,
    artifacts: &mut Artifacts,
    warnings: &mut Vec<String>,
) -> Result<()> {
    const STAGE: &str = "crosscorr";
    let panel = &prepared.panel;
    let spectrum = &prepared.spectrum;

    artifacts
        .write(
            "spectrum.json",
            &serde_json::to_string(&SpectrumJson::from_spectrum(spectrum)).expect("serializable"),
        )
        .map_err(|e| err(STAGE, e))?;

    let hist = cij_histogram(&prepared.correlation, config.cij_bins.max(1));
    let mut tsv = String::from("bin_lo\tbin_hi\tdensity\n");
    for k in 0..hist.density.len() {
        let _ = writeln!(
            tsv,
            "{}\t{}\t{}",
            fmt_f64(hist.edges[k]),
            fmt_f64(hist.edges[k + 1]),
            fmt_f64(hist.density[k])
        );
    }
    artifacts
        .write("cij_histogram.tsv", &tsv)
        .map_err(|e| err(STAGE, e))?;

    let dev = deviating_modes(spectrum);
    let summary = CrosscorrSummary {
        n: panel.n_stocks(),
        t: panel.n_days(),
        q: spectrum.bounds.q,
        lambda_min_ran: spectrum.bounds.lambda_min_ran,
        lambda_max_ran: spectrum.bounds.lambda_max_ran,
        mean_cij: hist.mean,
        lambda_max: spectrum.eigenvalues[0],
        lambda_min: *spectrum.eigenvalues.last().unwrap(),
        n_deviating: dev.len(),
        deviating_modes: dev,
        shared_days: prepared.shared_days,
        excluded: prepared.excluded.clone(),
    };
    artifacts
        .write_json("crosscorr_summary.json", &summary)
        .map_err(|e| err(STAGE, e))?;

    if let Some(sweep) = &config.t_sweep {
        let mut tsv = String::from("t\tlambda_max\n");
        for &t_len in sweep {
            if t_len < 2 || t_len > panel.n_days() {
                warnings.push(format!("[{STAGE}] t_sweep entry {t_len} out of range, skipped"));
                continue;
            }
            let rows: Vec<Vec<f64>> = (0..panel.n_stocks())
                .map(|i| (0..t_len).map(|k| panel.returns[(i, k)]).collect())
                .collect();
            let truncated = ReturnPanel::from_rows(
                panel.tickers.clone(),
                panel.dates[..t_len].to_vec(),
                rows,
            )
            .map_err(|e| err(STAGE, e))?;
            let spec = eigendecompose(&correlation_matrix(&truncated), t_len)
                .map_err(|e| err(STAGE, e))?;
            let _ = writeln!(tsv, "{}\t{}", t_len, fmt_f64(spec.eigenvalues[0]));
        }
        artifacts
            .write("lambda_max_sweep.tsv", &tsv)
            .map_err(|e| err(STAGE, e))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// sectors stage

#[derive(Serialize)]
struct SideReport {
    size: usize,
    label: Option<String>,
    matched: Option<usize>,
    fraction: Option<f64>,
    members: Vec<String>,
}

fn side_report(
    members: &[smkt_core::sectors::SubsectorMember],
    labels: &BTreeMap<String, String>,
    floor: f64,
) -> SideReport {
    let label = label_subsector(members, labels, floor);
    let (label_name, matched, fraction) = match &label {
        SideLabel::Empty => (None, None, None),
        SideLabel::Null { .. } => (None, None, None),
        SideLabel::Identified {
            label,
            matched,
            size,
        } => (
            Some(label.clone()),
            Some(*matched),
            Some(*matched as f64 / *size as f64),
        ),
    };
    SideReport {
        size: members.len(),
        label: label_name,
        matched,
        fraction,
        members: members.iter().map(|m| m.ticker.clone()).collect(),
    }
}

#[derive(Serialize)]
struct SubsectorRow {
    alpha: usize,
    lambda: f64,
    deviating: bool,
    u_c: f64,
    basis_dependent: bool,
    positive: SideReport,
    negative: SideReport,
}

fn stage_sectors(
    config: &RunConfig,
    prepared: &Prepared,
    artifacts: &mut Artifacts,
    warnings: &mut Vec<String>,
) -> Result<()> {
    const STAGE: &str = "sectors";
    let panel = &prepared.panel;
    let spectrum = &prepared.spectrum;
    let n = panel.n_stocks();

    let labels: BTreeMap<String, String> = match &config.labels {
        Some(path) => ingest_labels(path).map_err(|e| err(STAGE, e))?,
        None => {
            warnings.push(format!("[{STAGE}] no label file; all sides report as Null"));
            BTreeMap::new()
        }
    };

    let max_mode = config.table_modes.min(n - 1);
    let mut rows = Vec::new();
    for alpha in 1..=max_mode {
        for &u_c in &config.u_c_grid {
            let p = select_subsectors(spectrum, &panel.tickers, alpha, u_c, false)
                .map_err(|e| err(STAGE, e))?;
            rows.push(SubsectorRow {
                alpha,
                lambda: spectrum.eigenvalues[alpha],
                deviating: spectrum.eigenvalues[alpha] > spectrum.bounds.lambda_max_ran,
                u_c,
                basis_dependent: p.basis_dependent,
                positive: side_report(&p.positive, &labels, config.identification_floor),
                negative: side_report(&p.negative, &labels, config.identification_floor),
            });
        }
    }
    artifacts
        .write_json("subsector_table.json", &rows)
        .map_err(|e| err(STAGE, e))?;

    let alpha_max = config.alpha_max.min(n - 1);
    if alpha_max < config.alpha_max {
        warnings.push(format!(
            "[{STAGE}] alpha_max clamped to {alpha_max} (panel has {n} stocks)"
        ));
    }
    let report = anti_correlation_scan(
        panel,
        spectrum,
        config.scan_u_c,
        alpha_max,
        config.n_samples,
        config.seed,
    )
    .map_err(|e| err(STAGE, e))?;

    let mut tsv = String::from("alpha\tc_real\tc_rand\tstderr\td\n");
    for m in &report.modes {
        let _ = writeln!(
            tsv,
            "{}\t{}\t{}\t{}\t{}",
            m.alpha,
            fmt_opt(m.c_real),
            fmt_opt(m.c_rand),
            fmt_opt(m.c_rand_stderr),
            fmt_opt(m.d)
        );
    }
    artifacts
        .write("anti_correlation.tsv", &tsv)
        .map_err(|e| err(STAGE, e))?;
    artifacts
        .write_json("anti_correlation.json", &report)
        .map_err(|e| err(STAGE, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// leverage stage

#[derive(Serialize)]
struct LeverageFitReport {
    ticker: String,
    days: usize,
    full: Option<ExpFit>,
    before: Option<ExpFit>,
    after: Option<ExpFit>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct LeverageStageReport {
    t_max: usize,
    fit_window: (usize, usize),
    boundary_date: Option<NaiveDate>,
    indices: Vec<LeverageFitReport>,
    average_full_fit: Option<ExpFit>,
    average_before_fit: Option<ExpFit>,
    average_after_fit: Option<ExpFit>,
}

fn curve_tsv(curve: &LeverageCurve, fit: Option<&ExpFit>) -> String {
    let mut tsv = String::from("t\tl\tfit\n");
    for (i, &t) in curve.lags.iter().enumerate() {
        let fitted = fit.map(|f| f.amplitude * (-(t as f64) / f.decay_days).exp());
        let _ = writeln!(tsv, "{}\t{}\t{}", t, fmt_f64(curve.values[i]), fmt_opt(fitted));
    }
    tsv
}

fn fit_or_note(
    curve: &LeverageCurve,
    window: (usize, usize),
    notes: &mut Vec<String>,
    what: &str,
) -> Result<Option<ExpFit>> {
    match exponential_fit(curve, window) {
        Ok(fit) => Ok(Some(fit)),
        Err(smkt_core::Error::DegenerateFit(msg)) => {
            notes.push(format!("{what}: degenerate fit: {msg}"));
            Ok(None)
        }
        Err(e) => Err(err("leverage", e)),
    }
}

fn stage_leverage(
    config: &RunConfig,
    artifacts: &mut Artifacts,
    warnings: &mut Vec<String>,
) -> Result<()> {
    const STAGE: &str = "leverage";
    let mut indices: Vec<DailySeries> = Vec::new();
    for path in &config.inputs {
        let report = ingest_csv(path, CsvKind::Index).map_err(|e| err(STAGE, e))?;
        indices.extend(report.series);
    }
    let selected: Vec<DailySeries> = if config.index_tickers.is_empty() {
        indices
    } else {
        let mut chosen = Vec::new();
        for wanted in &config.index_tickers {
            match indices.iter().find(|s| &s.ticker == wanted) {
                Some(s) => chosen.push(s.clone()),
                None => {
                    return Err(err(
                        STAGE,
                        format!("index ticker {wanted} not found in inputs"),
                    ))
                }
            }
        }
        chosen
    };
    if selected.is_empty() {
        return Err(err(
            STAGE,
            format!("no {INDEX_PREFIX} index series found in inputs"),
        ));
    }

    let mut reports = Vec::new();
    let mut full_curves = Vec::new();
    let mut before_curves = Vec::new();
    let mut after_curves = Vec::new();
    for series in &selected {
        let mut notes = Vec::new();
        let normalized = log_returns(series, 1)
            .and_then(|r| normalize(&r))
            .map_err(|e| err(STAGE, e))?;
        let mut curve = curve_for_series(&normalized, config.t_max).map_err(|e| err(STAGE, e))?;
        let full_fit = fit_or_note(&curve, config.fit_window, &mut notes, "full")?;
        curve.fit = full_fit;
        artifacts
            .write(
                &format!("leverage_{}_full.tsv", sanitize(&series.ticker)),
                &curve_tsv(&curve, curve.fit.as_ref()),
            )
            .map_err(|e| err(STAGE, e))?;

        let mut before_fit = None;
        let mut after_fit = None;
        if let Some(boundary) = config.boundary_date {
            let in_range = normalized.dates.first().map(|f| *f < boundary).unwrap_or(false)
                && normalized.dates.last().map(|l| boundary <= *l).unwrap_or(false);
            if in_range {
                let (before, after) =
                    split_periods(&normalized, boundary).map_err(|e| err(STAGE, e))?;
                for (side, name) in [(&before, "before"), (&after, "after")] {
                    if side.len() <= config.t_max {
                        notes.push(format!("{name}: too short for t_max, skipped"));
                        continue;
                    }
                    let mut side_curve =
                        curve_for_series(side, config.t_max).map_err(|e| err(STAGE, e))?;
                    let fit = fit_or_note(&side_curve, config.fit_window, &mut notes, name)?;
                    side_curve.fit = fit;
                    artifacts
                        .write(
                            &format!("leverage_{}_{name}.tsv", sanitize(&series.ticker)),
                            &curve_tsv(&side_curve, side_curve.fit.as_ref()),
                        )
                        .map_err(|e| err(STAGE, e))?;
                    if name == "before" {
                        before_fit = side_curve.fit;
                        before_curves.push(side_curve);
                    } else {
                        after_fit = side_curve.fit;
                        after_curves.push(side_curve);
                    }
                }
            } else {
                warnings.push(format!(
                    "[{STAGE}] boundary {boundary} outside {} range, split skipped",
                    series.ticker
                ));
            }
        }
        reports.push(LeverageFitReport {
            ticker: series.ticker.clone(),
            days: normalized.len(),
            full: curve.fit,
            before: before_fit,
            after: after_fit,
            notes,
        });
        full_curves.push(curve);
    }

    // averaging is only meaningful across several indices
    let mut average_fits = [None, None, None];
    if selected.len() >= 2 {
        let groups = [
            (&full_curves, "full", 0),
            (&before_curves, "before", 1),
            (&after_curves, "after", 2),
        ];
        for (curves, name, slot) in groups {
            if curves.len() != selected.len() {
                continue;
            }
            let avg = average_curves(curves).map_err(|e| err(STAGE, e))?;
            let mut notes = Vec::new();
            let fit = fit_or_note(&avg, config.fit_window, &mut notes, "average")?;
            artifacts
                .write(
                    &format!("leverage_average_{name}.tsv"),
                    &curve_tsv(&avg, fit.as_ref()),
                )
                .map_err(|e| err(STAGE, e))?;
            average_fits[slot] = fit;
            for note in notes {
                warnings.push(format!("[{STAGE}] {note}"));
            }
        }
    }

    artifacts
        .write_json(
            "leverage_fits.json",
            &LeverageStageReport {
                t_max: config.t_max,
                fit_window: config.fit_window,
                boundary_date: config.boundary_date,
                indices: reports,
                average_full_fit: average_fits[0],
                average_before_fit: average_fits[1],
                average_after_fit: average_fits[2],
            },
        )
        .map_err(|e| err(STAGE, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// recurrence stage

#[derive(Serialize)]
struct RecurrenceFitReport {
    kind: String,
    q: f64,
    n_sources: usize,
    n_skipped: usize,
    n_samples: usize,
    gamma: Option<f64>,
    x_min: Option<f64>,
    ks: Option<f64>,
    p_value: Option<f64>,
    n_tail: Option<usize>,
    note: Option<String>,
}

/// Interval sets at threshold q (in units of each source's own volatility
/// standard deviation).
fn interval_sets_at(vols: &[(String, Vec<f64>)], q: f64) -> Vec<IntervalSet> {
    vols.iter()
        .map(|(ticker, values)| {
            let sigma = stats::population_std(values);
            let mut set = recurrence_intervals_values(ticker, values, q * sigma);
            set.q = q;
            set
        })
        .collect()
}

fn recurrence_side(
    kind: &str,
    vols: &[(String, Vec<f64>)],
    config: &RunConfig,
    seed_base: u64,
    artifacts: &mut Artifacts,
    reports: &mut Vec<RecurrenceFitReport>,
) -> Result<()> {
    const STAGE: &str = "recurrence";
    for (qi, &q) in config.q_grid.iter().enumerate() {
        let sets = interval_sets_at(vols, q);
        let mut report = RecurrenceFitReport {
            kind: kind.to_string(),
            q,
            n_sources: sets.len(),
            n_skipped: 0,
            n_samples: 0,
            gamma: None,
            x_min: None,
            ks: None,
            p_value: None,
            n_tail: None,
            note: None,
        };
        let pooled = match pool_scaled(&sets) {
            Ok(p) => p,
            Err(e) => {
                report.note = Some(e.to_string());
                reports.push(report);
                continue;
            }
        };
        report.n_skipped = pooled.n_skipped;
        report.n_samples = pooled.samples.len();

        let spec = LogBinSpec {
            bins_per_decade: config.bins_per_decade,
            min_samples: 50,
        };
        match scaled_distribution(&pooled.samples, spec) {
            Ok(dist) => {
                let mut tsv = String::from("x\tdensity\tcount\n");
                for k in 0..dist.density.len() {
                    let center = (dist.edges[k] * dist.edges[k + 1]).sqrt();
                    let _ = writeln!(
                        tsv,
                        "{}\t{}\t{}",
                        fmt_f64(center),
                        fmt_f64(dist.density[k]),
                        dist.counts[k]
                    );
                }
                artifacts
                    .write(&format!("recurrence_{kind}_q{}.tsv", format_q(q)), &tsv)
                    .map_err(|e| err(STAGE, e))?;
            }
            Err(e) => {
                report.note = Some(e.to_string());
                reports.push(report);
                continue;
            }
        }

        match powerlaw_fit(&pooled.samples, XminPolicy::from(config.x_min_policy)) {
            Ok(fit) => {
                report.gamma = Some(fit.gamma);
                report.x_min = Some(fit.x_min);
                report.ks = Some(fit.ks);
                report.n_tail = Some(fit.n_tail);
                let test = ks_test(
                    &pooled.samples,
                    fit.gamma,
                    fit.x_min,
                    config.n_boot,
                    derive_seed(config.seed, seed_base + qi as u64),
                )
                .map_err(|e| err(STAGE, e))?;
                report.p_value = Some(test.p_value);
            }
            Err(e) => {
                report.note = Some(e.to_string());
            }
        }
        reports.push(report);
    }
    Ok(())
}

fn stage_recurrence(
    config: &RunConfig,
    artifacts: &mut Artifacts,
    warnings: &mut Vec<String>,
) -> Result<()> {
    const STAGE: &str = "recurrence";
    // Each stock is handled on its own date axis; intervals count that
    // series' trading days, unaffected by the panel intersection.
    let mut price_vols: Vec<(String, Vec<f64>)> = Vec::new();
    let mut volume_vols: Vec<(String, Vec<f64>)> = Vec::new();
    for path in &config.inputs {
        let report = ingest_csv(path, CsvKind::Price).map_err(|e| err(STAGE, e))?;
        for series in report.series {
            match log_returns(&series, config.delta_t).and_then(|r| normalize(&r)) {
                Ok(n) => price_vols.push((series.ticker.clone(), volatility(&n).values)),
                Err(e) => warnings.push(format!(
                    "[{STAGE}] price series {} excluded: {e}",
                    series.ticker
                )),
            }
        }
        let report = ingest_csv(path, CsvKind::Volume).map_err(|e| err(STAGE, e))?;
        for series in report.series {
            match volume_returns(&series).and_then(|r| normalize(&r)) {
                Ok(n) => volume_vols.push((series.ticker.clone(), volatility(&n).values)),
                Err(e) => warnings.push(format!(
                    "[{STAGE}] volume series {} excluded: {e}",
                    series.ticker
                )),
            }
        }
    }
    if price_vols.is_empty() {
        return Err(err(STAGE, "no usable price series"));
    }

    let mut reports = Vec::new();
    recurrence_side("price", &price_vols, config, 1000, artifacts, &mut reports)?;
    if volume_vols.is_empty() {
        warnings.push(format!("[{STAGE}] no usable volume series"));
    } else {
        recurrence_side(
            "volume",
            &volume_vols,
            config,
            2000,
            artifacts,
            &mut reports,
        )?;
    }
    artifacts
        .write_json("recurrence_fits.json", &reports)
        .map_err(|e| err(STAGE, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// synth stage

fn price_path(returns: &[f64], scale: f64, start: f64) -> Vec<f64> {
    let mut prices = Vec::with_capacity(returns.len() + 1);
    let mut p = start;
    prices.push(p);
    for r in returns {
        p *= (scale * r).exp();
        prices.push(p);
    }
    prices
}

#[derive(Serialize)]
struct SynthGroundTruth {
    config: SynthConfig,
    seed: u64,
    assignments: Vec<smkt_core::synth::StockAssignment>,
    index_ticker: Option<String>,
}

/// Synthetic index ticker emitted when index_leverage is configured.
pub const SYNTH_INDEX_TICKER: &str = "IDX:SYN";

/// Generate the synthetic market CSV, label file and ground-truth sidecar.
pub fn run_synth(config: &RunConfig, out_dir: &Path) -> Result<RunSummary> {
    const STAGE: &str = "synth";
    let synth = config
        .synth
        .as_ref()
        .ok_or_else(|| err(STAGE, "config has no `synth` section"))?;
    let seed = synth.seed.unwrap_or(config.seed);

    let mut sectors = Vec::new();
    for block in &synth.sectors {
        sectors.push(if block.signed {
            SectorSpec::signed_block(&block.label, block.start, block.size, block.loading)
        } else {
            SectorSpec::block(&block.label, block.start, block.size, block.loading)
        });
    }
    let panel_config = FactorPanelConfig {
        n: synth.n,
        t: synth.t,
        beta: vec![synth.market_beta; synth.n],
        sectors,
        noise_sigma: synth.noise_sigma,
        tail_dof: None,
        seed,
    };
    let (panel, truth) = generate_factor_panel(&panel_config).map_err(|e| err(STAGE, e))?;

    let index_returns = match &synth.index_leverage {
        Some(IndexLeverageConfig {
            feedback,
            decay_days,
        }) => Some(
            generate_leverage_series(&LeverageConfig {
                t: synth.t,
                base_sigma: 1.0,
                feedback: *feedback,
                decay_days: *decay_days,
                seed: derive_seed(seed, 9000),
            })
            .map_err(|e| err(STAGE, e))?,
        ),
        None => None,
    };

    // price axis: one extra day in front so log-returns land on the panel dates
    let mut price_dates = Vec::with_capacity(synth.t + 1);
    price_dates.push(prev_weekday(panel.dates[0]));
    price_dates.extend_from_slice(&panel.dates);

    let mut artifacts = Artifacts::new(out_dir).map_err(|e| err(STAGE, e))?;
    let mut csv = String::from("date,ticker,close,volume\n");
    let write_ticker = |csv: &mut String, ticker: &str, returns: &[f64], vol_seed: u64| {
        let prices = price_path(returns, synth.price_scale, 100.0);
        let volumes = generate_volume_series(
            synth.t + 1,
            synth.volume_sigma,
            synth.base_volume,
            vol_seed,
        );
        for k in 0..=synth.t {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                price_dates[k], ticker, prices[k], volumes[k]
            );
        }
    };
    for i in 0..synth.n {
        write_ticker(
            &mut csv,
            &panel.tickers[i],
            &panel.row(i),
            derive_seed(seed, 5000 + i as u64),
        );
    }
    if let Some(idx) = &index_returns {
        write_ticker(&mut csv, SYNTH_INDEX_TICKER, &idx.values, derive_seed(seed, 8000));
    }
    artifacts.write("data.csv", &csv).map_err(|e| err(STAGE, e))?;

    let mut labels = String::from("ticker,sector_label\n");
    for a in &truth.assignments {
        if let Some(sector) = &a.sector {
            let _ = writeln!(labels, "{},{}", a.ticker, sector);
        }
    }
    artifacts
        .write("labels.csv", &labels)
        .map_err(|e| err(STAGE, e))?;

    artifacts
        .write_json(
            "ground_truth.json",
            &SynthGroundTruth {
                config: synth.clone(),
                seed,
                assignments: truth.assignments,
                index_ticker: index_returns.as_ref().map(|_| SYNTH_INDEX_TICKER.to_string()),
            },
        )
        .map_err(|e| err(STAGE, e))?;

    write_manifest(config, &mut artifacts).map_err(|e| err(STAGE, e))?;
    Ok(RunSummary {
        files: artifacts.names(),
        warnings: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// pipeline driver

fn write_manifest(config: &RunConfig, artifacts: &mut Artifacts) -> std::io::Result<()> {
    artifacts.write_json("manifest.json", config)
}

/// Run the selected analyses (or the config's selection) over the configured
/// inputs, writing artifacts into `out_dir`.
pub fn run_pipeline(
    config: &RunConfig,
    out_dir: &Path,
    only: Option<Analysis>,
) -> Result<RunSummary> {
    let selection: Vec<Analysis> = match only {
        Some(a) => vec![a],
        None => config.analyses.clone(),
    };
    let mut artifacts = Artifacts::new(out_dir).map_err(|e| err("setup", e))?;
    let mut warnings = Vec::new();

    let result = (|| -> Result<()> {
        write_manifest(config, &mut artifacts).map_err(|e| err("setup", e))?;

        let needs_panel = selection
            .iter()
            .any(|a| matches!(a, Analysis::Crosscorr | Analysis::Sectors));
        let prepared = if needs_panel {
            Some(prepare_panel(config)?)
        } else {
            None
        };
        for stage in &selection {
            match stage {
                Analysis::Crosscorr => stage_crosscorr(
                    config,
                    prepared.as_ref().unwrap(),
                    &mut artifacts,
                    &mut warnings,
                )?,
                Analysis::Sectors => stage_sectors(
                    config,
                    prepared.as_ref().unwrap(),
                    &mut artifacts,
                    &mut warnings,
                )?,
                Analysis::Leverage => stage_leverage(config, &mut artifacts, &mut warnings)?,
                Analysis::Recurrence => stage_recurrence(config, &mut artifacts, &mut warnings)?,
            }
        }
        Ok(())
    })();

    match result {
        Ok(()) => Ok(RunSummary {
            files: artifacts.names(),
            warnings,
        }),
        Err(e) => {
            artifacts.cleanup();
            Err(e)
        }
    }
}
