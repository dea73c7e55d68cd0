//! Partition-constrained determinantal point processes for fair, diverse
//! subset selection.
//!
//! Given feature vectors `V` (one row per item) split into parts
//! `X_1, ..., X_p` and quotas `k_1, ..., k_p`, the P-DPP draws a set `S` with
//! exactly `k_i` items from each part, with probability proportional to
//! `det(V_S V_Sᵀ)`. This crate provides:
//!
//! * [`samplers`]: Sample-and-Project, k-DPP and k_i-DPP baselines, uniform
//!   baselines, Scale-and-Sample, and exact enumeration oracles;
//! * [`diagnostics`]: β-balance, δ-drop, leverage scores and the exact price
//!   of fairness;
//! * [`metrics`]: part-frequency unfairness, geometric diversity and
//!   distances between distribution tables;
//! * [`linalg`]: log-domain volumes, elementary symmetric polynomials and
//!   spectral surgery.
//!
//! ```
//! use fairdpp::{Matrix, PartitionedDataset, QuotaVector, SamplerConfig, sample_and_project};
//!
//! let v = Matrix::from_rows(&[[2.0, 0.0], [2.0, 3.0], [0.0, 2.0], [3.0, 2.0]]).unwrap();
//! let ds = PartitionedDataset::new(v, vec![0, 0, 1, 1]).unwrap();
//! let quotas = QuotaVector::new(&ds, vec![1, 1]).unwrap();
//! let s = sample_and_project(&ds, &quotas, &SamplerConfig::new(7)).unwrap();
//! assert!(s.is_fair(&ds, &quotas));
//! ```

pub mod dataset;
pub mod diagnostics;
pub mod distribution;
pub mod error;
pub mod linalg;
pub mod logvalue;
pub mod metrics;
pub mod samplers;
pub mod serde_float;

pub use dataset::{
    enumerate_fair_family, fair_family_size, random_partition, PartitionedDataset, QuotaVector,
    SampleSet, DEFAULT_ENUMERATION_CAP,
};
pub use distribution::{DistributionTable, Support};
pub use error::{Error, Result};
pub use linalg::{Matrix, Spectrum};
pub use logvalue::LogValue;
pub use metrics::{SummaryStats, TargetFrequency};
pub use samplers::{
    sample_and_project, sample_kdpp, sample_ki_dpp, sample_uniform, sample_uniform_constrained,
    scale_and_sample, PartOrder, SamplerConfig,
};
