//! Ingestion, time binning, per-bin orchestration and result emission.

mod analysis;
mod config;
mod emit;
mod fixture;
mod ingest;

pub use analysis::{analyze_files, run_analysis, AnalysisReport, BinResult};
pub use config::{AnalysisConfig, Baseline, BootstrapConfig, QuestionPolicy, Topic};
pub use emit::{emit, render, to_csv, to_json, to_svg, OutputFormat, CSV_COLUMNS};
pub use fixture::{drift_bins, make_fixture, render_fixture, DriftBin, FixturePaths, FixtureSpec};
pub use ingest::{bin_label, ingest, ingest_reader, select_schemas, Bin, DroppedBin, IngestDiagnostics, Ingested, RowDrop};
