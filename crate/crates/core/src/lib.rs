//! Analytics over crowd-sourced cell-tower snapshots.
//!
//! The pipeline ingests an OpenCelliD-style CSV, derives per-tower KPIs,
//! classifies towers against data-driven thresholds, clusters them
//! spatially, runs non-parametric comparisons, and assembles a
//! deterministic JSON report.

pub mod classifier;
pub mod error;
pub mod figures;
pub mod ingest;
pub mod metrics;
pub mod planning;
pub mod report;
pub mod spatial;
pub mod stats;
pub mod temporal;
pub mod thresholds;

pub use classifier::{Classifier, StrategicRule, TowerClass};
pub use error::{Error, Result};
pub use ingest::{parse_dataset, ColumnMapping, Radio, TowerRecord, ValidationReport};
pub use metrics::{EnrichedTower, UtilizationKpis};
pub use report::{run_analysis, to_canonical_json, AnalysisConfig, AnalysisReport, Dataset};
pub use spatial::geocode::Gazetteer;
pub use thresholds::{QuantileConfig, ThresholdSet};
