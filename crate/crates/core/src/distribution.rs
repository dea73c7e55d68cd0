use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dataset::{QuotaVector, SampleSet};
use crate::error::{Error, Result};
use crate::logvalue::LogValue;

/// Tolerance on the total mass of a table.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// The family a table is declared to live on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Support {
    /// Sets meeting the quotas exactly.
    Fair { quotas: QuotaVector },
    /// All subsets of a fixed size.
    Size { k: usize },
    /// Whatever was observed.
    Empirical,
}

/// An explicit probability table over subsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    support: Support,
    entries: BTreeMap<SampleSet, f64>,
}

impl DistributionTable {
    pub fn new(entries: BTreeMap<SampleSet, f64>, support: Support) -> Result<Self> {
        if let Some((s, p)) = entries.iter().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::domain(format!("probability {p} for {s} is invalid")));
        }
        let total: f64 = entries.values().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(DistributionTable { support, entries })
    }

    /// Normalises non-negative log-domain weights.
    ///
    /// Sets of zero weight stay in the table with probability zero.
    pub fn from_log_weights(weights: Vec<(SampleSet, LogValue)>, support: Support) -> Result<Self> {
        if weights.iter().any(|(_, w)| w.sign() < 0) {
            return Err(Error::domain("negative weight"));
        }
        let total = LogValue::sum(weights.iter().map(|(_, w)| *w));
        if total.is_zero() {
            return Err(Error::degenerate(None, "every set has zero weight"));
        }
        let entries = weights
            .into_iter()
            .map(|(s, w)| (s, (w / total).to_f64()))
            .collect();
        Self::new(entries, support)
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn prob(&self, set: &SampleSet) -> f64 {
        self.entries.get(set).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SampleSet, f64)> {
        self.entries.iter().map(|(s, p)| (s, *p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total probability of the sets accepted by `pred`.
    pub fn mass(&self, pred: impl Fn(&SampleSet) -> bool) -> f64 {
        self.entries
            .iter()
            .filter(|(s, _)| pred(s))
            .map(|(_, p)| *p)
            .sum()
    }

    /// The table conditioned on `pred`, re-labelled with `support`.
    pub fn conditional(&self, pred: impl Fn(&SampleSet) -> bool, support: Support) -> Result<Self> {
        let mass = self.mass(&pred);
        if mass <= 0.0 {
            return Err(Error::degenerate(None, "conditioning event has zero probability"));
        }
        let entries = self
            .entries
            .iter()
            .filter(|(s, _)| pred(s))
            .map(|(s, p)| (s.clone(), p / mass))
            .collect();
        Self::new(entries, support)
    }
}
