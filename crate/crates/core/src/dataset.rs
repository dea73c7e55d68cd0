//! Partitioned datasets, per-part quotas and the fair family of subsets.
//!
//! Rows and parts are indexed from zero.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Default refusal threshold for brute-force enumeration of the fair family.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// A feature matrix whose rows are split into `p` non-empty parts.
#[derive(Clone, Debug)]
pub struct PartitionedDataset {
    features: Matrix,
    labels: Vec<usize>,
    parts: Vec<Vec<usize>>,
}

impl PartitionedDataset {
    /// `labels[x]` is the part of row `x`; parts must be `0..p` with none empty.
    pub fn new(features: Matrix, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != features.nrows() {
            return Err(Error::InvalidDataset(format!(
                "{} labels for {} rows",
                labels.len(),
                features.nrows()
            )));
        }
        let p = labels.iter().max().map_or(0, |m| m + 1);
        let mut parts = vec![Vec::new(); p];
        for (row, &label) in labels.iter().enumerate() {
            parts[label].push(row);
        }
        if let Some(empty) = parts.iter().position(Vec::is_empty) {
            return Err(Error::InvalidDataset(format!(
                "part {empty} has no rows; part ids must be dense in 0..{p}"
            )));
        }
        Ok(PartitionedDataset {
            features,
            labels,
            parts,
        })
    }

    /// Every row in a single part.
    pub fn single_part(features: Matrix) -> Self {
        let m = features.nrows();
        Self::new(features, vec![0; m]).expect("one non-empty part")
    }

    pub fn features(&self) -> &Matrix {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    /// Row ids of part `i`, ascending.
    pub fn part(&self, i: usize) -> &[usize] {
        &self.parts[i]
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    /// The sub-matrix `V_{X_i}`.
    pub fn part_matrix(&self, i: usize) -> Matrix {
        self.features
            .select_rows(&self.parts[i])
            .expect("parts are non-empty")
    }

    /// Same partition over a different feature matrix with the same row count.
    pub fn with_features(&self, features: Matrix) -> Result<Self> {
        Self::new(features, self.labels.clone())
    }
}

/// Target counts `(k_1, ..., k_p)`, validated against a dataset.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QuotaVector(Vec<usize>);

impl QuotaVector {
    /// Checks `k_i <= |X_i|` for every part and `k <= n`.
    pub fn new(ds: &PartitionedDataset, quotas: Vec<usize>) -> Result<Self> {
        if quotas.len() != ds.num_parts() {
            return Err(Error::InvalidQuota(format!(
                "{} quotas given for {} parts",
                quotas.len(),
                ds.num_parts()
            )));
        }
        for (i, (&k_i, size)) in quotas.iter().zip(ds.part_sizes()).enumerate() {
            if k_i > size {
                return Err(Error::InvalidQuota(format!(
                    "quota {k_i} for part {i} exceeds its {size} rows"
                )));
            }
        }
        let k: usize = quotas.iter().sum();
        if k > ds.dim() {
            return Err(Error::InvalidQuota(format!(
                "total quota {k} exceeds feature dimension {}; every fair subset would have zero volume",
                ds.dim()
            )));
        }
        Ok(QuotaVector(quotas))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn get(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn num_parts(&self) -> usize {
        self.0.len()
    }

    /// `k = sum of k_i`.
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

/// A set of row ids, kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SampleSet(Vec<usize>);

impl SampleSet {
    /// Sorts the ids and rejects duplicates.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("sample set contains a repeated index"));
        }
        Ok(SampleSet(indices))
    }

    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        SampleSet(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, row: usize) -> bool {
        self.0.binary_search(&row).is_ok()
    }

    /// `|S ∩ X_i|` for every part.
    pub fn per_part_counts(&self, ds: &PartitionedDataset) -> Vec<usize> {
        let mut counts = vec![0; ds.num_parts()];
        for &x in &self.0 {
            counts[ds.labels()[x]] += 1;
        }
        counts
    }

    /// Membership in the fair family `B`.
    pub fn is_fair(&self, ds: &PartitionedDataset, quotas: &QuotaVector) -> bool {
        self.0.iter().all(|&x| x < ds.num_rows()) && self.per_part_counts(ds) == quotas.as_slice()
    }

    /// Feature rows of the selected items.
    pub fn rows(&self, features: &Matrix) -> Vec<Vec<f64>> {
        self.0.iter().map(|&x| features.row(x)).collect()
    }
}

impl fmt::Display for SampleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// `|B| = prod_i C(|X_i|, k_i)`, saturating.
pub fn fair_family_size(ds: &PartitionedDataset, quotas: &QuotaVector) -> u128 {
    ds.part_sizes()
        .iter()
        .zip(quotas.as_slice())
        .fold(1u128, |acc, (&size, &k)| acc.saturating_mul(binomial(size, k)))
}

/// Every member of the fair family, each exactly once.
///
/// Combinations are lexicographic within a part; the first part varies
/// slowest.
pub fn enumerate_fair_family(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    cap: u128,
) -> Result<FairFamilyIter> {
    let size = fair_family_size(ds, quotas);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(FairFamilyIter::new(
        ds.parts().to_vec(),
        quotas.as_slice().to_vec(),
    ))
}

/// Odometer over per-part combinations.
pub struct FairFamilyIter {
    parts: Vec<Vec<usize>>,
    combos: Vec<Vec<usize>>,
    done: bool,
}

impl FairFamilyIter {
    fn new(parts: Vec<Vec<usize>>, quotas: Vec<usize>) -> Self {
        let combos = quotas.iter().map(|&k| (0..k).collect()).collect();
        FairFamilyIter {
            parts,
            combos,
            done: false,
        }
    }

    fn current(&self) -> SampleSet {
        let mut rows: Vec<usize> = self
            .parts
            .iter()
            .zip(&self.combos)
            .flat_map(|(part, combo)| combo.iter().map(move |&c| part[c]))
            .collect();
        rows.sort_unstable();
        SampleSet::from_sorted_unchecked(rows)
    }

    fn advance(&mut self) {
        for i in (0..self.parts.len()).rev() {
            if next_combination(&mut self.combos[i], self.parts[i].len()) {
                return;
            }
            let k = self.combos[i].len();
            self.combos[i] = (0..k).collect();
        }
        self.done = true;
    }
}

impl Iterator for FairFamilyIter {
    type Item = SampleSet;

    fn next(&mut self) -> Option<SampleSet> {
        if self.done {
            return None;
        }
        let item = self.current();
        self.advance();
        Some(item)
    }
}

/// Steps `combo` (ascending positions in `0..n`) to its lexicographic successor.
pub(crate) fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    for i in (0..k).rev() {
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in (i + 1)..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// All `k`-subsets of `0..m` in lexicographic order.
pub fn k_subsets(m: usize, k: usize) -> impl Iterator<Item = SampleSet> {
    let mut combo: Option<Vec<usize>> = if k <= m { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let current = combo.take()?;
        let mut next = current.clone();
        if next_combination(&mut next, m) {
            combo = Some(next);
        }
        Some(SampleSet::from_sorted_unchecked(current))
    })
}

/// Assigns each of `m` rows to one of `p` parts independently and uniformly.
///
/// The whole draw is repeated until every part is non-empty.
pub fn random_partition(m: usize, p: usize, seed: u64) -> Result<Vec<usize>> {
    if p == 0 || m < p {
        return Err(Error::domain(format!(
            "cannot split {m} rows into {p} non-empty parts"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let labels: Vec<usize> = (0..m).map(|_| rng.random_range(0..p)).collect();
        let mut seen = vec![false; p];
        labels.iter().for_each(|&l| seen[l] = true);
        if seen.iter().all(|&s| s) {
            return Ok(labels);
        }
    }
}
