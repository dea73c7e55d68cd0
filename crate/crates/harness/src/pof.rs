//! Before/after tail-scaling study on synthetic Gaussian data.

use fairdpp::diagnostics::drop_report;
use fairdpp::samplers::{derive_seed, scale_part_tails};
use fairdpp::{PartOrder, QuotaVector};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::experiment::{run_labelled, ExperimentConfig, Report, SamplerKind, TargetSpec};
use crate::quotas::QuotaPolicy;
use crate::synthetic::gaussian_partitioned;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PofStudySpec {
    /// Rows per part.
    pub part_sizes: Vec<usize>,
    pub dim: usize,
    pub quotas: Vec<usize>,
    pub repetitions: usize,
    /// Tail factor; `1/dim` when unset.
    pub factor: Option<f64>,
    pub part_order: PartOrder,
}

impl PofStudySpec {
    /// `m` rows split `m/3` and `m - m/3`.
    pub fn thirds(m: usize, dim: usize, quotas: Vec<usize>, repetitions: usize) -> Self {
        PofStudySpec {
            part_sizes: vec![m / 3, m - m / 3],
            dim,
            quotas,
            repetitions,
            factor: None,
            part_order: PartOrder::Consecutive,
        }
    }
}

const BEFORE: [SamplerKind; 5] = [
    SamplerKind::Unif,
    SamplerKind::KDpp,
    SamplerKind::ScaleAndSample,
    SamplerKind::KiUnif,
    SamplerKind::PDpp,
];

const AFTER: [SamplerKind; 4] = [SamplerKind::Unif, SamplerKind::KDpp, SamplerKind::KiUnif, SamplerKind::PDpp];

/// Runs the samplers on a Gaussian instance, then again after shrinking each
/// part's tail singular values (past its quota) by the factor.
///
/// Rows are prefixed `before/` and `after/`. Scale-and-Sample only appears
/// before scaling, since it applies the same scaling itself; its diversity
/// is measured on the unscaled features. The drop reports of both instances
/// are attached as `dropBefore` and `dropAfter`.
pub fn price_of_fairness_study(spec: &PofStudySpec, seed: u64) -> Result<Report> {
    if spec.part_sizes.len() != spec.quotas.len() {
        return Err(HarnessError::Config(format!(
            "{} part sizes but {} quotas",
            spec.part_sizes.len(),
            spec.quotas.len()
        )));
    }
    let ds = gaussian_partitioned(&spec.part_sizes, spec.dim, derive_seed(seed, u64::MAX))?;
    let quotas = QuotaVector::new(&ds, spec.quotas.clone()).map_err(|e| HarnessError::Config(e.to_string()))?;
    let factor = spec.factor.unwrap_or(1.0 / spec.dim as f64);
    let scaled = scale_part_tails(&ds, &quotas, factor)?;

    let config = serde_json::json!({ "study": spec, "seed": seed });
    let mut cfg = ExperimentConfig::new(quotas.total(), spec.repetitions, seed);
    cfg.quota_policy = QuotaPolicy::Explicit(spec.quotas.clone());
    cfg.targets = vec![TargetSpec::Uniform];
    cfg.part_order = spec.part_order;
    cfg.scale_factor = Some(factor);

    cfg.sampler_set = BEFORE.to_vec();
    let mut report = run_labelled(&ds, &cfg, "before/", config.clone())?;
    cfg.sampler_set = AFTER.to_vec();
    let after = run_labelled(&scaled, &cfg, "after/", config)?;

    report.rows.extend(after.rows.into_iter().map(|mut r| {
        r.config_hash = report.config_hash.clone();
        r
    }));
    report.exclusions.extend(after.exclusions);
    let attach = |r: Result<_>| -> serde_json::Value {
        match r {
            Ok(d) => serde_json::to_value(d).expect("drop report serialises"),
            Err(e) => serde_json::Value::String(e.to_string()),
        }
    };
    report.attachments.insert("dropBefore".into(), attach(drop_report(&ds, &quotas).map_err(Into::into)));
    report.attachments.insert("dropAfter".into(), attach(drop_report(&scaled, &quotas).map_err(Into::into)));
    report.attachments.insert("scaleFactor".into(), serde_json::json!(factor));
    Ok(report)
}
