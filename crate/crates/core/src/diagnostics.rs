//! Spectral conditions on a partition and the quantities they control.
//!
//! * **β-balance**: `σ_{i,j} >= σ_j / β` for every part `i` and index `j`,
//!   where `σ_j` are the singular values of `V` and `σ_{i,j}` those of
//!   `V_{X_i}`. Sample-and-Project is within `prod k_i! * β^{2k}` of the
//!   P-DPP on such partitions.
//! * **δ-drop**: `σ_{i,k_i+1} <= δ σ_{i,k_i}` for every part. Small δ
//!   concentrates the k-DPP on the fair family, so the price of fairness
//!   `KL(P-DPP || k-DPP)` is small.

use serde::{Deserialize, Serialize};

use crate::dataset::{binomial, PartitionedDataset, QuotaVector, DEFAULT_ENUMERATION_CAP};
use crate::error::{Error, Result};
use crate::linalg::{singular_values, Matrix, SortedSvd, Spectrum, RELATIVE_ZERO_TOLERANCE};
use crate::logvalue::LogValue;
use crate::samplers::{constrained_log_volume_sum, unconstrained_log_volume_sum};

/// Singular values below this fraction of the largest one of `V` count as zero.
pub fn singular_zero_tolerance() -> f64 {
    RELATIVE_ZERO_TOLERANCE.sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BalanceReport {
    /// Least β for which the partition is β-balanced; `inf` if none exists.
    #[serde(with = "crate::serde_float")]
    pub minimal_beta: f64,
    /// `max_j σ_j / σ_{i,j}` for each part.
    #[serde(with = "crate::serde_float::vec")]
    pub per_part_ratios: Vec<f64>,
    pub full_spectrum: Spectrum,
    /// Part spectra padded with zeros to length `n`.
    pub part_spectra: Vec<Spectrum>,
}

/// Computes the minimal β and the spectra behind it.
///
/// A pair of values both below tolerance has ratio 1; a non-zero `σ_j`
/// against a vanishing `σ_{i,j}` has ratio `inf`.
pub fn balance_report(ds: &PartitionedDataset) -> BalanceReport {
    let n = ds.dim();
    let full = singular_values(ds.features()).padded(n);
    let zero_below = full.largest() * singular_zero_tolerance();
    let part_spectra: Vec<Spectrum> = (0..ds.num_parts())
        .map(|i| singular_values(&ds.part_matrix(i)).padded(n))
        .collect();
    let per_part_ratios: Vec<f64> = part_spectra
        .iter()
        .map(|part| {
            (0..n)
                .map(|j| {
                    let (s, s_i) = (full.get(j), part.get(j));
                    match (s > zero_below, s_i > zero_below) {
                        (false, _) => 1.0,
                        (true, false) => f64::INFINITY,
                        (true, true) => s / s_i,
                    }
                })
                .fold(1.0, f64::max)
        })
        .collect();
    let minimal_beta = per_part_ratios.iter().copied().fold(1.0, f64::max);
    BalanceReport {
        minimal_beta,
        per_part_ratios,
        full_spectrum: full,
        part_spectra,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DropReport {
    /// `σ_{i,k_i+1} / σ_{i,k_i}` per part.
    pub per_part_delta: Vec<f64>,
    /// Least δ for which the partition is a δ-drop partition.
    pub minimal_delta: f64,
}

/// Requires `k_i >= 1` for every part and a non-vanishing `σ_{i,k_i}`.
pub fn drop_report(ds: &PartitionedDataset, quotas: &QuotaVector) -> Result<DropReport> {
    if quotas.num_parts() != ds.num_parts() {
        return Err(Error::InvalidQuota(format!(
            "{} quotas for {} parts",
            quotas.num_parts(),
            ds.num_parts()
        )));
    }
    let n = ds.dim();
    let scale = singular_values(ds.features()).largest();
    let zero_below = scale * singular_zero_tolerance();
    let mut per_part_delta = Vec::with_capacity(ds.num_parts());
    for i in 0..ds.num_parts() {
        let k_i = quotas.get(i);
        if k_i == 0 {
            return Err(Error::domain(format!("part {i} has quota 0; the drop ratio needs k_i >= 1")));
        }
        let spectrum = singular_values(&ds.part_matrix(i)).padded(n + 1);
        let head = spectrum.get(k_i - 1);
        if head <= zero_below {
            return Err(Error::degenerate(
                Some(i),
                format!("singular value {k_i} of the part vanishes"),
            ));
        }
        let tail = spectrum.get(k_i);
        per_part_delta.push(if tail <= zero_below { 0.0 } else { tail / head });
    }
    let minimal_delta = per_part_delta.iter().copied().fold(0.0, f64::max);
    Ok(DropReport {
        per_part_delta,
        minimal_delta,
    })
}

/// Leverage scores `v_jᵀ (VᵀV)^+ v_j`, via the left singular vectors of the
/// numerical row space. They lie in `[0, 1]` and sum to `rank(V)`.
pub fn leverage_scores(features: &Matrix) -> Vec<f64> {
    let svd = SortedSvd::new(features);
    let cutoff = svd.singular_values.first().copied().unwrap_or(0.0) * singular_zero_tolerance();
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    (0..features.nrows())
        .map(|x| (0..rank).map(|j| svd.u[(x, j)].powi(2)).sum())
        .collect()
}

/// Outcome of the bounded-leverage test for random partitions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LeverageCheck {
    pub holds: bool,
    /// `threshold - max leverage`.
    pub margin: f64,
    /// `δ² / (8 p ln(n p))`.
    #[serde(with = "crate::serde_float")]
    pub threshold: f64,
    pub max_leverage: f64,
}

/// True iff every leverage score is at most `δ² / (8 p ln(n p))`; under that
/// condition a uniformly random `p`-partition is `sqrt((1+δ) p)`-balanced
/// with probability at least `1/e`.
pub fn theorem3_hypothesis(features: &Matrix, p: usize, delta: f64) -> Result<LeverageCheck> {
    if p == 0 {
        return Err(Error::domain("p must be at least 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta = {delta} must lie in (0, 1)")));
    }
    let np = (features.ncols() * p) as f64;
    let threshold = delta * delta / (8.0 * p as f64 * np.ln());
    let max_leverage = leverage_scores(features).into_iter().fold(0.0, f64::max);
    Ok(LeverageCheck {
        holds: max_leverage <= threshold,
        margin: threshold - max_leverage,
        threshold,
        max_leverage,
    })
}

/// The β for which a random `p`-partition is balanced with constant probability.
pub fn theorem3_beta(p: usize, delta: f64) -> f64 {
    ((1.0 + delta) * p as f64).sqrt()
}

/// `log(prod_i k_i! * β^{2k})`.
pub fn approximation_bound_factor(beta: f64, quotas: &QuotaVector) -> Result<LogValue> {
    if !(beta >= 1.0) {
        return Err(Error::domain(format!("beta = {beta} must be at least 1")));
    }
    let log_eta: f64 = quotas
        .as_slice()
        .iter()
        .map(|&k| (2..=k).map(|t| (t as f64).ln()).sum::<f64>())
        .sum();
    Ok(LogValue::from_ln(log_eta + 2.0 * quotas.total() as f64 * beta.ln()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PriceOfFairnessHypothesis {
    pub epsilon: f64,
    /// `N_0 = C(k + p - 1, p - 1)`.
    pub n0: f64,
    /// Largest singular value over all parts.
    pub gamma: f64,
    /// Smallest non-zero singular value of `V`.
    pub sigma_n: f64,
    /// Observed drop ratio; `None` when the drop report is undefined.
    pub delta: Option<f64>,
    /// `ε / (n N_0)`.
    pub delta_threshold: f64,
    /// `sqrt(2) k (γ / σ_n)^2`.
    pub n_threshold: f64,
    pub dimension: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PriceOfFairnessReport {
    /// `KL(P-DPP || k-DPP)` in nats.
    pub exact_kl: f64,
    /// `log sum_{|S|=k} det(V_S V_Sᵀ)`.
    pub log_normalizer_all: LogValue,
    /// `log sum_{S in B} det(V_S V_Sᵀ)`.
    pub log_normalizer_fair: LogValue,
    /// Share of k-DPP mass outside the fair family.
    pub epsilon_star: f64,
    /// `log 1/(1 - ε*)`; equals `exact_kl`.
    pub lemma7_bound: f64,
    pub theorem4_hypothesis: PriceOfFairnessHypothesis,
}

/// Exact price of fairness.
///
/// The P-DPP is the k-DPP conditioned on the fair family, so its divergence
/// from the k-DPP is `-log q(B) = log(sum_C det / sum_B det)`. The first
/// sum comes from elementary symmetric polynomials of the squared singular
/// values, the second from [`constrained_log_volume_sum`].
pub fn price_of_fairness_exact(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    epsilon: f64,
) -> Result<PriceOfFairnessReport> {
    price_of_fairness_with_cap(ds, quotas, epsilon, DEFAULT_ENUMERATION_CAP)
}

pub fn price_of_fairness_with_cap(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    epsilon: f64,
    cap: u128,
) -> Result<PriceOfFairnessReport> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!("epsilon = {epsilon} must lie in (0, 1)")));
    }
    let k = quotas.total();
    let all = unconstrained_log_volume_sum(ds.features(), k)?;
    let fair = constrained_log_volume_sum(ds, quotas, cap)?;
    if fair.is_zero() {
        return Err(Error::degenerate(None, "the fair family carries no volume"));
    }
    let exact_kl = ((all / fair).log_magnitude()).max(0.0);
    let epsilon_star = -(-exact_kl).exp_m1();
    Ok(PriceOfFairnessReport {
        exact_kl,
        log_normalizer_all: all,
        log_normalizer_fair: fair,
        epsilon_star,
        lemma7_bound: -(-epsilon_star).ln_1p(),
        theorem4_hypothesis: theorem4_hypothesis(ds, quotas, epsilon),
    })
}

/// Evaluates the drop and dimension conditions under which the price of
/// fairness is at most `log 1/(1 - ε)`.
pub fn theorem4_hypothesis(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    epsilon: f64,
) -> PriceOfFairnessHypothesis {
    let n = ds.dim();
    let k = quotas.total();
    let p = ds.num_parts();
    let n0 = binomial(k + p - 1, p - 1) as f64;
    let full = singular_values(ds.features());
    let zero_below = full.largest() * singular_zero_tolerance();
    let sigma_n = full
        .values()
        .iter()
        .copied()
        .filter(|&s| s > zero_below)
        .fold(f64::INFINITY, f64::min);
    let gamma = (0..p)
        .map(|i| singular_values(&ds.part_matrix(i)).largest())
        .fold(0.0, f64::max);
    let delta = drop_report(ds, quotas).ok().map(|r| r.minimal_delta);
    let delta_threshold = epsilon / (n as f64 * n0);
    let n_threshold = std::f64::consts::SQRT_2 * k as f64 * (gamma / sigma_n).powi(2);
    let holds = delta.is_some_and(|d| d <= delta_threshold) && n as f64 >= n_threshold;
    PriceOfFairnessHypothesis {
        epsilon,
        n0,
        gamma,
        sigma_n,
        delta,
        delta_threshold,
        n_threshold,
        dimension: n,
        holds,
    }
}
