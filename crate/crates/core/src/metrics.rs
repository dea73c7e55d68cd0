//! Unfairness, diversity and distribution-comparison measures.
//!
//! All logarithms are natural. KL divergences that put mass where the
//! reference has none are reported as `f64::INFINITY`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{PartitionedDataset, SampleSet};
use crate::distribution::{DistributionTable, Support};
use crate::error::{Error, Result};
use crate::linalg::log_volume_det;
use crate::logvalue::LogValue;

/// A probability vector over the parts of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TargetFrequency(Vec<f64>);

impl TargetFrequency {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::domain("target frequency needs at least one part"));
        }
        if q.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::domain("target frequencies must be finite and non-negative"));
        }
        let total: f64 = q.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("target frequencies sum to {total}")));
        }
        Ok(TargetFrequency(q))
    }

    /// `q_i = 1/p`.
    pub fn uniform(p: usize) -> Self {
        TargetFrequency(vec![1.0 / p as f64; p])
    }

    /// `q_i = |X_i| / m`.
    pub fn proportional(ds: &PartitionedDataset) -> Self {
        let m = ds.num_rows() as f64;
        TargetFrequency(ds.part_sizes().iter().map(|&s| s as f64 / m).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// `sum_i q_i ln(q_i / s_i)` with `0 ln(0/x) = 0` and `x ln(x/0) = inf`.
pub fn kl_vectors(q: &[f64], s: &[f64]) -> f64 {
    q.iter()
        .zip(s)
        .filter(|(qi, _)| **qi > 0.0)
        .map(|(qi, si)| {
            if *si <= 0.0 {
                f64::INFINITY
            } else {
                qi * (qi / si).ln()
            }
        })
        .sum()
}

/// Relative unfairness `D^q(S) = KL(q || s)` where `s_i = |S ∩ X_i| / |S|`.
pub fn unfairness(target: &TargetFrequency, set: &SampleSet, ds: &PartitionedDataset) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::domain("unfairness of the empty set is undefined"));
    }
    if target.as_slice().len() != ds.num_parts() {
        return Err(Error::domain(format!(
            "target has {} parts, dataset has {}",
            target.as_slice().len(),
            ds.num_parts()
        )));
    }
    let k = set.len() as f64;
    let s: Vec<f64> = set.per_part_counts(ds).iter().map(|&c| c as f64 / k).collect();
    Ok(kl_vectors(target.as_slice(), &s))
}

/// `log det(V_S V_Sᵀ)`.
pub fn log_geometric_diversity(ds: &PartitionedDataset, set: &SampleSet) -> Result<LogValue> {
    if set.is_empty() {
        return Err(Error::domain("geometric diversity of the empty set is undefined"));
    }
    Ok(log_volume_det(&set.rows(ds.features())))
}

/// `KL(a || b) = sum_S a_S ln(a_S / b_S)`.
pub fn kl_divergence(a: &DistributionTable, b: &DistributionTable) -> f64 {
    let kl: f64 = a
        .iter()
        .filter(|(_, pa)| *pa > 0.0)
        .map(|(s, pa)| {
            let pb = b.prob(s);
            if pb <= 0.0 {
                f64::INFINITY
            } else {
                pa * (pa / pb).ln()
            }
        })
        .sum();
    kl.max(0.0)
}

/// `½ sum_S |a_S - b_S|` over the union of supports.
pub fn total_variation(a: &DistributionTable, b: &DistributionTable) -> f64 {
    let from_a: f64 = a.iter().map(|(s, pa)| (pa - b.prob(s)).abs()).sum();
    let only_b: f64 = b.iter().filter(|(s, _)| a.prob(s) == 0.0).map(|(_, pb)| pb).sum();
    (0.5 * (from_a + only_b)).min(1.0)
}

/// Relative frequencies of the observed sets.
pub fn empirical_distribution(samples: &[SampleSet]) -> Result<DistributionTable> {
    if samples.is_empty() {
        return Err(Error::domain("no samples"));
    }
    let mut counts: BTreeMap<SampleSet, usize> = BTreeMap::new();
    for s in samples {
        *counts.entry(s.clone()).or_default() += 1;
    }
    let n = samples.len() as f64;
    let entries = counts.into_iter().map(|(s, c)| (s, c as f64 / n)).collect();
    DistributionTable::new(entries, Support::Empirical)
}

/// Mean, sample standard deviation and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    #[serde(with = "crate::serde_float")]
    pub mean: f64,
    #[serde(with = "crate::serde_float")]
    pub std: f64,
    #[serde(with = "crate::serde_float")]
    pub sem: f64,
    pub count: usize,
}

/// Uses the `n - 1` denominator; a single value has `std = sem = 0`.
///
/// Infinite inputs propagate to the mean; the spread is then reported as `nan`.
pub fn summary_stats(values: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::domain("summary of zero values"));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (std, sem) = if values.len() == 1 {
        (0.0, 0.0)
    } else if !mean.is_finite() {
        (f64::NAN, f64::NAN)
    } else {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        (std, std / n.sqrt())
    };
    Ok(SummaryStats {
        mean,
        std,
        sem,
        count: values.len(),
    })
}
