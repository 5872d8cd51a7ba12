//! Pipeline around `smkt-core`: CSV ingestion, run configuration, stage
//! orchestration and report emission.

pub mod config;
pub mod ingest;
pub mod pipeline;

pub use config::{RunConfig, SynthConfig};
pub use ingest::{ingest_csv, ingest_labels, CsvKind, IngestError};
pub use pipeline::{run_pipeline, run_synth, PipelineError, Stage};
