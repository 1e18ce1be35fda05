//! Ingestion, preprocessing, per-series orchestration and report rendering.

pub mod analyze;
pub mod ingest;
pub mod prepare;
pub mod report;

pub use analyze::{analyze, analyze_all, AnalysisConfig, BuildingReport};
pub use ingest::{load_csv, load_values, parse_csv, GapPolicy, LoadedData, Quantity, RawSeries};
pub use prepare::{detrend, normalize, prepare, PreparedSeries};
pub use report::{render_report, ReportFormat, SCHEMA_VERSION};
