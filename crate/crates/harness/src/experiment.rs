//! Repeated-sampling experiments and their summary reports.

use std::collections::BTreeMap;
use std::str::FromStr;

use fairdpp::metrics::{log_geometric_diversity, summary_stats, unfairness};
use fairdpp::samplers::{derive_seed, scale_part_tails};
use fairdpp::{
    sample_and_project, sample_kdpp, sample_ki_dpp, sample_uniform, sample_uniform_constrained,
    PartOrder, PartitionedDataset, QuotaVector, SampleSet, SamplerConfig, TargetFrequency,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};
use crate::quotas::{quotas_for, QuotaPolicy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SamplerKind {
    #[serde(rename = "UNIF")]
    Unif,
    #[serde(rename = "k-DPP")]
    KDpp,
    #[serde(rename = "k_i-UNIF")]
    KiUnif,
    #[serde(rename = "k_i-DPP")]
    KiDpp,
    #[serde(rename = "P-DPP")]
    PDpp,
    #[serde(rename = "Scale-and-Sample")]
    ScaleAndSample,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 6] = [
        SamplerKind::Unif,
        SamplerKind::KDpp,
        SamplerKind::KiUnif,
        SamplerKind::KiDpp,
        SamplerKind::PDpp,
        SamplerKind::ScaleAndSample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::Unif => "UNIF",
            SamplerKind::KDpp => "k-DPP",
            SamplerKind::KiUnif => "k_i-UNIF",
            SamplerKind::KiDpp => "k_i-DPP",
            SamplerKind::PDpp => "P-DPP",
            SamplerKind::ScaleAndSample => "Scale-and-Sample",
        }
    }

    /// Whether the sampler consumes quotas.
    pub fn needs_quotas(self) -> bool {
        !matches!(self, SamplerKind::Unif | SamplerKind::KDpp)
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

impl FromStr for SamplerKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s.to_ascii_lowercase().chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        Ok(match key.as_str() {
            "unif" => SamplerKind::Unif,
            "kdpp" => SamplerKind::KDpp,
            "kiunif" => SamplerKind::KiUnif,
            "kidpp" => SamplerKind::KiDpp,
            "pdpp" | "sampleandproject" => SamplerKind::PDpp,
            "scaleandsample" => SamplerKind::ScaleAndSample,
            _ => return Err(HarnessError::Config(format!("unknown sampler `{s}`"))),
        })
    }
}

/// Reference part frequencies for the unfairness metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "q")]
pub enum TargetSpec {
    /// Equal share per part (`un`).
    Uniform,
    /// Dataset proportions (`prop`).
    Proportional,
    /// The frequencies implied by the quotas (`quota`).
    Quota,
    Explicit(Vec<f64>),
}

impl TargetSpec {
    pub fn name(&self) -> String {
        match self {
            TargetSpec::Uniform => "un".into(),
            TargetSpec::Proportional => "prop".into(),
            TargetSpec::Quota => "quota".into(),
            TargetSpec::Explicit(q) => q.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
        }
    }

    fn resolve(&self, ds: &PartitionedDataset, quotas: Option<&QuotaVector>) -> Result<TargetFrequency> {
        let t = match self {
            TargetSpec::Uniform => TargetFrequency::uniform(ds.num_parts()),
            TargetSpec::Proportional => TargetFrequency::proportional(ds),
            TargetSpec::Quota => {
                let q = quotas.ok_or_else(|| HarnessError::Config("the quota target needs quotas".into()))?;
                if q.total() == 0 {
                    return Err(HarnessError::Config("the quota target needs k >= 1".into()));
                }
                let k = q.total() as f64;
                TargetFrequency::new(q.as_slice().iter().map(|&x| x as f64 / k).collect())?
            }
            TargetSpec::Explicit(q) => TargetFrequency::new(q.clone())?,
        };
        if t.as_slice().len() != ds.num_parts() {
            return Err(HarnessError::Config(format!(
                "target `{}` has {} parts, dataset has {}",
                self.name(),
                t.as_slice().len(),
                ds.num_parts()
            )));
        }
        Ok(t)
    }
}

impl FromStr for TargetSpec {
    type Err = HarnessError;

    /// `un`, `prop`, `quota`, or `;`-separated frequencies.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "un" | "uniform" => Ok(TargetSpec::Uniform),
            "prop" | "proportional" => Ok(TargetSpec::Proportional),
            "quota" => Ok(TargetSpec::Quota),
            _ => s
                .split(';')
                .map(|t| t.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(TargetSpec::Explicit)
                .map_err(|_| HarnessError::Config(format!("bad target `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExperimentConfig {
    pub sampler_set: Vec<SamplerKind>,
    pub quota_policy: QuotaPolicy,
    pub repetitions: usize,
    pub k: usize,
    pub targets: Vec<TargetSpec>,
    pub seed: u64,
    pub part_order: PartOrder,
    /// Tail factor for Scale-and-Sample; `1/n` when unset.
    pub scale_factor: Option<f64>,
    pub emit_raw: bool,
}

impl ExperimentConfig {
    pub fn new(k: usize, repetitions: usize, seed: u64) -> Self {
        ExperimentConfig {
            sampler_set: SamplerKind::ALL.to_vec(),
            quota_policy: QuotaPolicy::Equal,
            repetitions,
            k,
            targets: vec![TargetSpec::Uniform, TargetSpec::Proportional],
            seed,
            part_order: PartOrder::Consecutive,
            scale_factor: None,
            emit_raw: false,
        }
    }
}

/// One summary line: a statistic of one metric for one sampler.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub sampler: String,
    pub target: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
    pub n: usize,
    /// Repetitions dropped as degenerate.
    pub excluded: usize,
    pub seed: u64,
    pub config_hash: String,
}

/// One metric value from one repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRow {
    pub sampler: String,
    pub repetition: usize,
    pub seed: u64,
    pub target: String,
    pub metric: String,
    pub value: f64,
    pub config_hash: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub rows: Vec<ReportRow>,
    pub raw: Vec<RawRow>,
    pub config: serde_json::Value,
    pub config_hash: String,
    pub dataset_fingerprint: String,
    /// Degenerate repetitions per sampler, with the first error seen.
    pub exclusions: BTreeMap<String, Exclusion>,
    /// Extra diagnostics attached by the study that produced the report.
    pub attachments: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Exclusion {
    pub count: usize,
    pub first_error: String,
}

impl Report {
    pub fn row(&self, sampler: &str, target: &str, metric: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.sampler == sampler && r.target == target && r.metric == metric)
    }
}

/// Hex SHA-256 of the dataset's shape, values and labels.
pub fn dataset_fingerprint(ds: &PartitionedDataset) -> String {
    let mut h = Sha256::new();
    h.update((ds.num_rows() as u64).to_le_bytes());
    h.update((ds.dim() as u64).to_le_bytes());
    for x in ds.features().to_row_major() {
        h.update(x.to_le_bytes());
    }
    for &l in ds.labels() {
        h.update((l as u64).to_le_bytes());
    }
    hex::encode(h.finalize())
}

pub(crate) fn config_hash(config: &serde_json::Value, fingerprint: &str) -> String {
    let mut h = Sha256::new();
    h.update(config.to_string().as_bytes());
    h.update(fingerprint.as_bytes());
    hex::encode(h.finalize())[..16].to_owned()
}

const LOG_G: &str = "logG";
const UNFAIRNESS: &str = "D";
const NO_TARGET: &str = "-";

/// Draws `repetitions` samples from every configured sampler and summarises
/// unfairness against each target and log geometric diversity (nats).
///
/// Degenerate repetitions are excluded from the statistics and counted.
pub fn run_experiment(ds: &PartitionedDataset, cfg: &ExperimentConfig) -> Result<Report> {
    let config = serde_json::to_value(cfg).expect("config serialises");
    run_labelled(ds, cfg, "", config)
}

pub(crate) fn run_labelled(
    ds: &PartitionedDataset,
    cfg: &ExperimentConfig,
    prefix: &str,
    config: serde_json::Value,
) -> Result<Report> {
    if cfg.repetitions == 0 {
        return Err(HarnessError::Config("repetitions must be at least 1".into()));
    }
    if cfg.k == 0 || cfg.k > ds.num_rows() {
        return Err(HarnessError::Config(format!(
            "k = {} must lie in 1..={}",
            cfg.k,
            ds.num_rows()
        )));
    }
    let wants_quotas = cfg.sampler_set.iter().any(|s| s.needs_quotas())
        || cfg.targets.contains(&TargetSpec::Quota);
    let quotas = if wants_quotas {
        Some(quotas_for(&cfg.quota_policy, ds, cfg.k)?)
    } else {
        None
    };
    let targets: Vec<(String, TargetFrequency)> = cfg
        .targets
        .iter()
        .map(|t| Ok((t.name(), t.resolve(ds, quotas.as_ref())?)))
        .collect::<Result<_>>()?;
    let scaled = match (&quotas, cfg.sampler_set.contains(&SamplerKind::ScaleAndSample)) {
        (Some(q), true) => {
            let factor = cfg.scale_factor.unwrap_or(1.0 / ds.dim() as f64);
            Some(scale_part_tails(ds, q, factor)?)
        }
        _ => None,
    };

    let fingerprint = dataset_fingerprint(ds);
    let hash = config_hash(&config, &fingerprint);
    let mut report = Report {
        rows: Vec::new(),
        raw: Vec::new(),
        config,
        config_hash: hash.clone(),
        dataset_fingerprint: fingerprint,
        exclusions: BTreeMap::new(),
        attachments: BTreeMap::new(),
    };

    for &kind in &cfg.sampler_set {
        let label = format!("{prefix}{}", kind.name());
        let draw = |rep: usize| -> (u64, fairdpp::Result<SampleSet>) {
            let rep_seed = derive_seed(cfg.seed, rep as u64);
            let seed = derive_seed(rep_seed, kind.stream());
            let sc = SamplerConfig::new(seed).with_part_order(cfg.part_order);
            let q = quotas.as_ref();
            let out = match kind {
                SamplerKind::Unif => sample_uniform(ds.num_rows(), cfg.k, seed),
                SamplerKind::KDpp => sample_kdpp(ds.features(), cfg.k, &sc),
                SamplerKind::KiUnif => sample_uniform_constrained(ds, q.unwrap(), seed),
                SamplerKind::KiDpp => sample_ki_dpp(ds, q.unwrap(), &sc),
                SamplerKind::PDpp => sample_and_project(ds, q.unwrap(), &sc),
                SamplerKind::ScaleAndSample => {
                    sample_kdpp(scaled.as_ref().unwrap().features(), q.unwrap().total(), &sc)
                }
            };
            (rep_seed, out)
        };
        let outcomes: Vec<(u64, fairdpp::Result<SampleSet>)> =
            (0..cfg.repetitions).into_par_iter().map(draw).collect();

        let mut kept: Vec<(usize, u64, SampleSet)> = Vec::new();
        let mut excluded = 0;
        for (rep, (rep_seed, out)) in outcomes.into_iter().enumerate() {
            match out {
                Ok(s) => kept.push((rep, rep_seed, s)),
                Err(e @ fairdpp::Error::Degenerate { .. }) => {
                    excluded += 1;
                    report
                        .exclusions
                        .entry(label.clone())
                        .or_insert_with(|| Exclusion {
                            count: 0,
                            first_error: e.to_string(),
                        })
                        .count += 1;
                }
                Err(e) => return Err(e.into()),
            }
        }

        let mut series: Vec<(String, &str, Vec<f64>)> = targets
            .iter()
            .map(|(name, _)| (name.clone(), UNFAIRNESS, Vec::new()))
            .collect();
        series.push((NO_TARGET.to_owned(), LOG_G, Vec::new()));
        for (rep, rep_seed, s) in &kept {
            for (i, (_, t)) in targets.iter().enumerate() {
                series[i].2.push(unfairness(t, s, ds)?);
            }
            let g = log_geometric_diversity(ds, s)?;
            series[targets.len()].2.push(if g.is_zero() { f64::NEG_INFINITY } else { g.log_magnitude() });
            if cfg.emit_raw {
                for (target, metric, values) in &series {
                    report.raw.push(RawRow {
                        sampler: label.clone(),
                        repetition: *rep,
                        seed: *rep_seed,
                        target: target.clone(),
                        metric: (*metric).to_owned(),
                        value: *values.last().unwrap(),
                        config_hash: hash.clone(),
                    });
                }
            }
        }
        for (target, metric, values) in series {
            let (mean, std, sem) = match summary_stats(&values) {
                Ok(s) => (s.mean, s.std, s.sem),
                Err(_) => (f64::NAN, f64::NAN, f64::NAN),
            };
            report.rows.push(ReportRow {
                sampler: label.clone(),
                target,
                metric: metric.to_owned(),
                mean,
                std,
                sem,
                n: values.len(),
                excluded,
                seed: cfg.seed,
                config_hash: hash.clone(),
            });
        }
    }
    Ok(report)
}
