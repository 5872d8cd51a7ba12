//! CSV ingestion.
//!
//! One schema for every market: `date,ticker,close,volume` with ISO dates,
//! one row per (ticker, day). Index series use the reserved ticker prefix
//! `IDX:`. Sector labels come from a separate `ticker,sector_label` file.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use thiserror::Error;

use smkt_core::DailySeries;

/// Reserved prefix marking index series.
pub const INDEX_PREFIX: &str = "IDX:";

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: expected header `{expected}`, found `{found}`")]
    Header {
        path: String,
        expected: String,
        found: String,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: duplicate entry for ({ticker}, {date})")]
    Duplicate {
        path: String,
        line: u64,
        ticker: String,
        date: NaiveDate,
    },
    #[error("{path}: {source}")]
    Series {
        path: String,
        source: smkt_core::Error,
    },
}

/// Which column/tickers a series ingest extracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    /// close prices of ordinary tickers
    Price,
    /// trading volumes of ordinary tickers
    Volume,
    /// close prices of `IDX:` tickers
    Index,
}

#[derive(Debug, Default)]
pub struct IngestReport {
    pub series: Vec<DailySeries>,
    pub rows_read: usize,
    pub rows_used: usize,
    /// rows for the other ticker class (index vs ordinary)
    pub rows_skipped: usize,
    pub warnings: Vec<String>,
}

/// Parse one market CSV into per-ticker daily series of the requested kind.
/// Series come out sorted by ticker with strictly increasing dates.
pub fn ingest_csv(path: &Path, kind: CsvKind) -> Result<IngestReport, IngestError> {
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IngestError::Io {
            path: path_str.clone(),
            message: e.to_string(),
        })?;

    let headers = reader.headers().map_err(|e| IngestError::Io {
        path: path_str.clone(),
        message: e.to_string(),
    })?;
    let found: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    let expected = ["date", "ticker", "close", "volume"];
    if found.is_empty() || found.iter().all(|h| h.is_empty()) {
        return Ok(IngestReport {
            warnings: vec![format!("{path_str}: empty file")],
            ..Default::default()
        });
    }
    if found != expected {
        return Err(IngestError::Header {
            path: path_str,
            expected: expected.join(","),
            found: found.join(","),
        });
    }

    let mut report = IngestReport::default();
    // ticker -> date -> value; insertion detects duplicates
    let mut per_ticker: BTreeMap<String, BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Io {
            path: path_str.clone(),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        report.rows_read += 1;
        if record.len() != 4 {
            return Err(IngestError::Parse {
                path: path_str,
                line,
                message: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|e| {
            IngestError::Parse {
                path: path_str.clone(),
                line,
                message: format!("bad date `{}`: {e}", &record[0]),
            }
        })?;
        let ticker = record[1].to_string();
        if ticker.is_empty() {
            return Err(IngestError::Parse {
                path: path_str,
                line,
                message: "empty ticker".to_string(),
            });
        }
        let is_index = ticker.starts_with(INDEX_PREFIX);
        let wanted = match kind {
            CsvKind::Price | CsvKind::Volume => !is_index,
            CsvKind::Index => is_index,
        };
        let column = match kind {
            CsvKind::Price | CsvKind::Index => 2,
            CsvKind::Volume => 3,
        };
        let value: f64 = record[column].parse().map_err(|e| IngestError::Parse {
            path: path_str.clone(),
            line,
            message: format!("bad number `{}`: {e}", &record[column]),
        })?;
        if !wanted {
            report.rows_skipped += 1;
            continue;
        }
        let dates = per_ticker.entry(ticker.clone()).or_default();
        if dates.insert(date, value).is_some() {
            return Err(IngestError::Duplicate {
                path: path_str,
                line,
                ticker,
                date,
            });
        }
        report.rows_used += 1;
    }

    for (ticker, entries) in per_ticker {
        let dates: Vec<NaiveDate> = entries.keys().copied().collect();
        let values: Vec<f64> = entries.values().copied().collect();
        let series =
            DailySeries::new(ticker, dates, values).map_err(|source| IngestError::Series {
                path: path_str.clone(),
                source,
            })?;
        report.series.push(series);
    }
    if report.series.is_empty() {
        report
            .warnings
            .push(format!("{path_str}: no usable rows for {kind:?}"));
    }
    Ok(report)
}

/// Parse a `ticker,sector_label` file.
pub fn ingest_labels(path: &Path) -> Result<BTreeMap<String, String>, IngestError> {
    let path_str = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| IngestError::Io {
            path: path_str.clone(),
            message: e.to_string(),
        })?;
    let headers = reader.headers().map_err(|e| IngestError::Io {
        path: path_str.clone(),
        message: e.to_string(),
    })?;
    let found: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
    if found.is_empty() || found.iter().all(|h| h.is_empty()) {
        return Ok(BTreeMap::new());
    }
    if found != ["ticker", "sector_label"] {
        return Err(IngestError::Header {
            path: path_str,
            expected: "ticker,sector_label".to_string(),
            found: found.join(","),
        });
    }
    let mut labels = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Io {
            path: path_str.clone(),
            message: e.to_string(),
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 2 {
            return Err(IngestError::Parse {
                path: path_str,
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        labels.insert(record[0].to_string(), record[1].to_string());
    }
    Ok(labels)
}
