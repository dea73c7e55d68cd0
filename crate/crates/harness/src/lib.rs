//! Ingestion, experiment running and reporting around the `fairdpp` samplers.
//!
//! All diversity values are natural logarithms (nats); divide by `ln 2` for
//! bits.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod pof;
pub mod quotas;
pub mod report;
pub mod synthetic;

pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, ExperimentConfig, Report, ReportRow, SamplerKind, TargetSpec};
pub use ingest::{ingest, IngestedDataset, IngestionConfig};
pub use pof::{price_of_fairness_study, PofStudySpec};
pub use quotas::{quotas_for, QuotaPolicy};
