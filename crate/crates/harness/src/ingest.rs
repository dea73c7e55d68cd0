//! Delimited-text ingestion and vectorisation.
//!
//! Rows with an empty or `?` field in any used column are dropped. Numeric
//! columns pass through (optionally standardised), categorical columns become
//! one 0/1 column per distinct value in sorted order, and the label column is
//! mapped to dense part ids in sorted order of its values.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};

use fairdpp::{Matrix, PartitionedDataset};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestionConfig {
    pub path: PathBuf,
    pub categorical_columns: Vec<String>,
    pub label_column: String,
    pub pairwise_products: bool,
    pub drop_redundant_columns: bool,
    pub subsample_size: Option<usize>,
    pub seed: u64,
    /// Field separator; comma unless set.
    pub delimiter: u8,
    /// Columns read but not turned into features.
    pub ignore_columns: Vec<String>,
    /// Centre and scale numeric columns before products are formed.
    pub standardize: bool,
}

impl IngestionConfig {
    pub fn new(path: impl Into<PathBuf>, label_column: impl Into<String>, seed: u64) -> Self {
        IngestionConfig {
            path: path.into(),
            categorical_columns: Vec::new(),
            label_column: label_column.into(),
            pairwise_products: false,
            drop_redundant_columns: false,
            subsample_size: None,
            seed,
            delimiter: b',',
            ignore_columns: Vec::new(),
            standardize: false,
        }
    }
}

/// A vectorised dataset together with the names behind its columns and parts.
#[derive(Clone, Debug)]
pub struct IngestedDataset {
    pub dataset: PartitionedDataset,
    pub column_names: Vec<String>,
    pub label_names: Vec<String>,
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field == "?"
}

pub fn ingest(cfg: &IngestionConfig) -> Result<IngestedDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter)
        .trim(csv::Trim::All)
        .from_path(&cfg.path)
        .map_err(|e| HarnessError::Data(format!("{}: {e}", cfg.path.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| HarnessError::Data(format!("{}: {e}", cfg.path.display())))?
        .iter()
        .map(str::to_owned)
        .collect();
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| HarnessError::Config(format!("unknown column `{name}`")))
    };
    let label_at = position(&cfg.label_column)?;
    let categorical: BTreeSet<usize> = cfg
        .categorical_columns
        .iter()
        .map(|c| position(c))
        .collect::<Result<_>>()?;
    let ignored: BTreeSet<usize> = cfg
        .ignore_columns
        .iter()
        .map(|c| position(c))
        .collect::<Result<_>>()?;
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|c| !ignored.contains(c) && (*c != label_at || categorical.contains(c)))
        .collect();

    let mut records: Vec<(u64, Vec<String>)> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| HarnessError::Data(format!("{}: {e}", cfg.path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        let used = feature_cols.iter().chain(std::iter::once(&label_at));
        if used.into_iter().any(|&c| is_missing(rec.get(c).unwrap_or(""))) {
            continue;
        }
        records.push((line, rec.iter().map(str::to_owned).collect()));
    }
    if records.is_empty() {
        return Err(HarnessError::Data("no complete rows left after filtering".into()));
    }
    if let Some(size) = cfg.subsample_size {
        if size > records.len() {
            return Err(HarnessError::Config(format!(
                "subsample of {size} requested but only {} complete rows",
                records.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut keep = index::sample(&mut rng, records.len(), size).into_vec();
        keep.sort_unstable();
        records = keep.into_iter().map(|i| std::mem::take(&mut records[i])).collect();
    }

    let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
    for &c in &feature_cols {
        if categorical.contains(&c) {
            let values: BTreeSet<&str> = records.iter().map(|(_, r)| r[c].as_str()).collect();
            for v in values {
                let col = records.iter().map(|(_, r)| f64::from(u8::from(r[c] == v))).collect();
                columns.push((format!("{}={v}", header[c]), col));
            }
        } else {
            let mut col = Vec::with_capacity(records.len());
            for (line, r) in &records {
                let x: f64 = r[c].parse().map_err(|_| {
                    HarnessError::Data(format!(
                        "line {line}, column `{}`: `{}` is not a number",
                        header[c], r[c]
                    ))
                })?;
                if !x.is_finite() {
                    return Err(HarnessError::Data(format!(
                        "line {line}, column `{}`: non-finite value",
                        header[c]
                    )));
                }
                col.push(x);
            }
            if cfg.standardize {
                standardize(&mut col);
            }
            columns.push((header[c].clone(), col));
        }
    }
    if cfg.pairwise_products {
        let base = columns.len();
        for i in 0..base {
            for j in i + 1..base {
                let col = columns[i].1.iter().zip(&columns[j].1).map(|(a, b)| a * b).collect();
                columns.push((format!("{}*{}", columns[i].0, columns[j].0), col));
            }
        }
    }
    if cfg.drop_redundant_columns {
        columns = drop_redundant(columns);
    }
    if columns.is_empty() {
        return Err(HarnessError::Data("no feature columns left".into()));
    }

    let label_names: Vec<String> = records
        .iter()
        .map(|(_, r)| r[label_at].clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let ids: HashMap<&str, usize> = label_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let labels = records.iter().map(|(_, r)| ids[r[label_at].as_str()]).collect();

    let (m, n) = (records.len(), columns.len());
    let mut data = vec![0.0; m * n];
    for (j, (_, col)) in columns.iter().enumerate() {
        for (i, x) in col.iter().enumerate() {
            data[i * n + j] = *x;
        }
    }
    let features = Matrix::from_row_major(m, n, &data)?;
    Ok(IngestedDataset {
        dataset: PartitionedDataset::new(features, labels)?,
        column_names: columns.into_iter().map(|(name, _)| name).collect(),
        label_names,
    })
}

fn standardize(col: &mut [f64]) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    for x in col.iter_mut() {
        *x = if sd > 0.0 { (*x - mean) / sd } else { 0.0 };
    }
}

/// Removes all-zero columns and exact duplicates, keeping first occurrences.
fn drop_redundant(columns: Vec<(String, Vec<f64>)>) -> Vec<(String, Vec<f64>)> {
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    columns
        .into_iter()
        .filter(|(_, col)| {
            if col.iter().all(|&x| x == 0.0) {
                return false;
            }
            // +0.0 and -0.0 compare equal, so normalise before hashing bits.
            let key: Vec<u64> = col.iter().map(|&x| (x + 0.0).to_bits()).collect();
            seen.insert(key)
        })
        .collect()
}

/// On-disk form of an ingested dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DatasetFile {
    pub rows: usize,
    pub cols: usize,
    pub column_names: Vec<String>,
    pub label_names: Vec<String>,
    /// Row-major feature values.
    pub features: Vec<f64>,
    pub labels: Vec<usize>,
}

impl From<&IngestedDataset> for DatasetFile {
    fn from(d: &IngestedDataset) -> Self {
        let f = d.dataset.features();
        DatasetFile {
            rows: f.nrows(),
            cols: f.ncols(),
            column_names: d.column_names.clone(),
            label_names: d.label_names.clone(),
            features: f.to_row_major(),
            labels: d.dataset.labels().to_vec(),
        }
    }
}

impl DatasetFile {
    pub fn into_dataset(self) -> Result<IngestedDataset> {
        let features = Matrix::from_row_major(self.rows, self.cols, &self.features)
            .map_err(|e| HarnessError::Data(e.to_string()))?;
        let dataset =
            PartitionedDataset::new(features, self.labels).map_err(|e| HarnessError::Data(e.to_string()))?;
        Ok(IngestedDataset {
            dataset,
            column_names: self.column_names,
            label_names: self.label_names,
        })
    }
}

pub fn save_dataset(d: &IngestedDataset, path: &Path) -> Result<()> {
    let json = serde_json::to_string(&DatasetFile::from(d)).expect("dataset serialises");
    std::fs::write(path, json).map_err(|e| HarnessError::io(path.display().to_string(), e))
}

pub fn load_dataset(path: &Path) -> Result<IngestedDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path.display().to_string(), e))?;
    let file: DatasetFile =
        serde_json::from_str(&text).map_err(|e| HarnessError::Data(format!("{}: {e}", path.display())))?;
    file.into_dataset()
}
