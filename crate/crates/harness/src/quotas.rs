use fairdpp::{PartitionedDataset, QuotaVector};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "quotas")]
pub enum QuotaPolicy {
    Equal,
    Proportional,
    Explicit(Vec<usize>),
}

impl std::str::FromStr for QuotaPolicy {
    type Err = HarnessError;

    /// `equal`, `proportional`, or a comma-separated list of counts.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(QuotaPolicy::Equal),
            "proportional" => Ok(QuotaPolicy::Proportional),
            _ => s
                .split(',')
                .map(|t| t.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(QuotaPolicy::Explicit)
                .map_err(|_| HarnessError::Config(format!("bad quota policy `{s}`"))),
        }
    }
}

/// Splits `k` in proportion to `weights` by the largest-remainder method;
/// remainder ties go to the lower index.
pub fn largest_remainder(k: usize, weights: &[usize]) -> Vec<usize> {
    let total: usize = weights.iter().sum();
    let exact: Vec<(usize, usize)> = weights
        .iter()
        .map(|&w| ((k * w) / total, (k * w) % total))
        .collect();
    let mut out: Vec<usize> = exact.iter().map(|&(q, _)| q).collect();
    let short = k - out.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| exact[b].1.cmp(&exact[a].1).then(a.cmp(&b)));
    for &i in order.iter().take(short) {
        out[i] += 1;
    }
    out
}

/// Quotas for `ds` summing to `k`; explicit lists must sum to `k` themselves.
pub fn quotas_for(policy: &QuotaPolicy, ds: &PartitionedDataset, k: usize) -> Result<QuotaVector> {
    let p = ds.num_parts();
    let quotas = match policy {
        QuotaPolicy::Equal => {
            if k < p {
                return Err(HarnessError::Config(format!(
                    "equal representation needs k >= p, got k = {k} and p = {p}"
                )));
            }
            largest_remainder(k, &vec![1; p])
        }
        QuotaPolicy::Proportional => largest_remainder(k, &ds.part_sizes()),
        QuotaPolicy::Explicit(q) => {
            if q.iter().sum::<usize>() != k {
                return Err(HarnessError::Config(format!(
                    "explicit quotas {q:?} do not sum to k = {k}"
                )));
            }
            q.clone()
        }
    };
    QuotaVector::new(ds, quotas).map_err(|e| HarnessError::Config(e.to_string()))
}
