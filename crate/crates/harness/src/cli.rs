use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fairdpp::diagnostics::{balance_report, drop_report, price_of_fairness_with_cap, theorem3_hypothesis};
use fairdpp::metrics::{log_geometric_diversity, unfairness};
use fairdpp::samplers::{exact_pdpp_distribution, scale_part_tails};
use fairdpp::{
    sample_and_project, sample_kdpp, sample_ki_dpp, sample_uniform, sample_uniform_constrained,
    PartOrder, SamplerConfig, DEFAULT_ENUMERATION_CAP,
};
use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::experiment::{run_experiment, ExperimentConfig, SamplerKind, TargetSpec};
use crate::ingest::{ingest, load_dataset, save_dataset, IngestionConfig};
use crate::pof::{price_of_fairness_study, PofStudySpec};
use crate::quotas::{quotas_for, QuotaPolicy};
use crate::report::{write_report, write_rows};

#[derive(Debug, Parser)]
#[command(name = "fairdpp", version, about = "Fair, diverse subset sampling with partition-constrained DPPs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vectorise a delimited text file into a dataset file.
    Ingest(IngestArgs),
    /// Draw one sample.
    Sample(SampleArgs),
    /// Spectral diagnostics: balance, drop, leverage and price of fairness.
    Diagnose(DiagnoseArgs),
    /// Exact P-DPP table by enumeration.
    Oracle(OracleArgs),
    /// Repeated sampling with summary statistics.
    Experiment(ExperimentArgs),
    /// Before/after tail-scaling study on Gaussian data.
    PofStudy(PofArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum OrderArg {
    Consecutive,
    RoundRobin,
}

impl From<OrderArg> for PartOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Consecutive => PartOrder::Consecutive,
            OrderArg::RoundRobin => PartOrder::RoundRobin,
        }
    }
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub label_column: String,
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub ignore: Vec<String>,
    #[arg(long)]
    pub pairwise_products: bool,
    #[arg(long)]
    pub drop_redundant: bool,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub subsample: Option<usize>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct QuotaArgs {
    /// Sample size.
    #[arg(long)]
    pub k: Option<usize>,
    /// `equal`, `proportional`, or counts such as `3,2`.
    #[arg(long)]
    pub quotas: Option<QuotaPolicy>,
}

impl QuotaArgs {
    /// Sample size: `--k`, or the sum of explicit quotas.
    fn k(&self) -> Result<usize> {
        match (&self.k, &self.quotas) {
            (Some(k), _) => Ok(*k),
            (None, Some(QuotaPolicy::Explicit(q))) => Ok(q.iter().sum()),
            _ => Err(HarnessError::Config("--k is required unless --quotas lists counts".into())),
        }
    }

    fn policy(&self) -> QuotaPolicy {
        self.quotas.clone().unwrap_or(QuotaPolicy::Equal)
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value = "P-DPP")]
    pub sampler: SamplerKind,
    #[command(flatten)]
    pub quota: QuotaArgs,
    #[arg(long, value_enum, default_value = "consecutive")]
    pub part_order: OrderArg,
    #[arg(long)]
    pub scale_factor: Option<f64>,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub quota: QuotaArgs,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Check the bounded-leverage condition for this δ.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub quota: QuotaArgs,
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u128,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub quota: QuotaArgs,
    /// Comma-separated sampler names; all six when omitted.
    #[arg(long, value_delimiter = ',')]
    pub samplers: Vec<SamplerKind>,
    /// Comma-separated targets: `un`, `prop`, `quota`, or `;`-separated frequencies.
    #[arg(long, value_delimiter = ',', default_value = "un,prop")]
    pub targets: Vec<TargetSpec>,
    #[arg(long, default_value_t = 100)]
    pub repetitions: usize,
    #[arg(long, value_enum, default_value = "consecutive")]
    pub part_order: OrderArg,
    #[arg(long)]
    pub scale_factor: Option<f64>,
    /// Also write per-repetition values to `<output>.raw.csv`.
    #[arg(long)]
    pub raw: bool,
    #[arg(long)]
    pub seed: u64,
    /// CSV path; the JSON sidecar goes to `<output>.json`. Prints CSV when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PofArgs {
    #[arg(long, default_value_t = 60)]
    pub m: usize,
    #[arg(long, default_value_t = 40)]
    pub n: usize,
    /// Size of the first part; `m/3` when omitted.
    #[arg(long)]
    pub first_part: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10,10")]
    pub quotas: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub repetitions: usize,
    #[arg(long)]
    pub factor: Option<f64>,
    #[arg(long, value_enum, default_value = "consecutive")]
    pub part_order: OrderArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| HarnessError::io("stdout", e.into()))?;
    writeln!(out).map_err(|e| HarnessError::io("stdout", e))
}

/// `-inf` for zero volume, otherwise the natural log of the volume.
fn log_g(v: fairdpp::LogValue) -> serde_json::Value {
    if v.is_zero() {
        json!("-inf")
    } else {
        json!(v.log_magnitude())
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest(a) => {
            let delimiter = u8::try_from(a.delimiter)
                .map_err(|_| HarnessError::Config("delimiter must be a single ASCII character".into()))?;
            let cfg = IngestionConfig {
                path: a.input,
                categorical_columns: a.categorical,
                label_column: a.label_column,
                pairwise_products: a.pairwise_products,
                drop_redundant_columns: a.drop_redundant,
                subsample_size: a.subsample,
                seed: a.seed,
                delimiter,
                ignore_columns: a.ignore,
                standardize: a.standardize,
            };
            let data = ingest(&cfg)?;
            save_dataset(&data, &a.output)?;
            print_json(&json!({
                "rows": data.dataset.num_rows(),
                "dim": data.dataset.dim(),
                "partSizes": data.dataset.part_sizes(),
                "labelNames": data.label_names,
                "output": a.output,
            }))
        }
        Command::Sample(a) => {
            let data = load_dataset(&a.dataset)?;
            let ds = &data.dataset;
            let k = a.quota.k()?;
            let cfg = SamplerConfig::new(a.seed).with_part_order(a.part_order.into());
            let quotas = if a.sampler.needs_quotas() {
                Some(quotas_for(&a.quota.policy(), ds, k)?)
            } else {
                None
            };
            let set = match a.sampler {
                SamplerKind::Unif => sample_uniform(ds.num_rows(), k, a.seed)?,
                SamplerKind::KDpp => sample_kdpp(ds.features(), k, &cfg)?,
                SamplerKind::KiUnif => sample_uniform_constrained(ds, quotas.as_ref().unwrap(), a.seed)?,
                SamplerKind::KiDpp => sample_ki_dpp(ds, quotas.as_ref().unwrap(), &cfg)?,
                SamplerKind::PDpp => sample_and_project(ds, quotas.as_ref().unwrap(), &cfg)?,
                SamplerKind::ScaleAndSample => {
                    let q = quotas.as_ref().unwrap();
                    let factor = a.scale_factor.unwrap_or(1.0 / ds.dim() as f64);
                    sample_kdpp(scale_part_tails(ds, q, factor)?.features(), k, &cfg)?
                }
            };
            let un = unfairness(&fairdpp::TargetFrequency::uniform(ds.num_parts()), &set, ds).ok();
            let prop = unfairness(&fairdpp::TargetFrequency::proportional(ds), &set, ds).ok();
            let g = if set.is_empty() { None } else { Some(log_g(log_geometric_diversity(ds, &set)?)) };
            print_json(&json!({
                "sampler": a.sampler.name(),
                "seed": a.seed,
                "quotas": quotas,
                "indices": set.indices(),
                "perPartCounts": set.per_part_counts(ds),
                "logG": g,
                "unfairness": { "un": un.map(fmt_float), "prop": prop.map(fmt_float) },
            }))
        }
        Command::Diagnose(a) => {
            let data = load_dataset(&a.dataset)?;
            let ds = &data.dataset;
            let mut out = json!({ "seed": a.seed, "balance": balance_report(ds) });
            if a.quota.k.is_some() || a.quota.quotas.is_some() {
                let q = quotas_for(&a.quota.policy(), ds, a.quota.k()?)?;
                out["quotas"] = json!(q);
                out["drop"] = match drop_report(ds, &q) {
                    Ok(r) => json!(r),
                    Err(e) => json!(e.to_string()),
                };
                out["priceOfFairness"] = json!(price_of_fairness_with_cap(ds, &q, a.epsilon, a.cap)?);
            }
            if let Some(delta) = a.delta {
                out["leverage"] = json!(theorem3_hypothesis(ds.features(), ds.num_parts(), delta)?);
            }
            print_json(&out)
        }
        Command::Oracle(a) => {
            let data = load_dataset(&a.dataset)?;
            let ds = &data.dataset;
            let q = quotas_for(&a.quota.policy(), ds, a.quota.k()?)?;
            let table = exact_pdpp_distribution(ds, &q, a.cap)?;
            let entries: Vec<_> = table
                .iter()
                .map(|(s, p)| json!({ "indices": s.indices(), "probability": p }))
                .collect();
            print_json(&json!({ "seed": a.seed, "quotas": q, "entries": entries }))
        }
        Command::Experiment(a) => {
            let data = load_dataset(&a.dataset)?;
            let mut cfg = ExperimentConfig::new(a.quota.k()?, a.repetitions, a.seed);
            if !a.samplers.is_empty() {
                cfg.sampler_set = a.samplers;
            }
            cfg.quota_policy = a.quota.policy();
            cfg.targets = a.targets;
            cfg.part_order = a.part_order.into();
            cfg.scale_factor = a.scale_factor;
            cfg.emit_raw = a.raw;
            let report = run_experiment(&data.dataset, &cfg)?;
            emit(&report, a.output.as_deref())
        }
        Command::PofStudy(a) => {
            let first = a.first_part.unwrap_or(a.m / 3);
            if first == 0 || first >= a.m {
                return Err(HarnessError::Config(format!("first part size {first} must lie in 1..{}", a.m)));
            }
            let spec = PofStudySpec {
                part_sizes: vec![first, a.m - first],
                dim: a.n,
                quotas: a.quotas,
                repetitions: a.repetitions,
                factor: a.factor,
                part_order: a.part_order.into(),
            };
            let report = price_of_fairness_study(&spec, a.seed)?;
            emit(&report, a.output.as_deref())
        }
    }
}

fn fmt_float(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn emit(report: &crate::experiment::Report, output: Option<&std::path::Path>) -> Result<()> {
    match output {
        Some(path) => write_report(report, path),
        None => write_rows(&report.rows, std::io::stdout().lock())
            .map_err(|e| HarnessError::io("stdout", std::io::Error::other(e))),
    }
}
