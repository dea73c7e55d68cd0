//! Subset samplers and exact oracles.
//!
//! [`sample_and_project`] is the partition-constrained sampler: it keeps a
//! working copy `w_x` of every feature vector, repeatedly draws an item from
//! an unfilled part with probability proportional to `|w_x|^2`, then projects
//! every working vector onto the orthogonal complement of the chosen one.
//! With a single part this is the sequential volume-sampling heuristic used
//! for unconstrained k-DPPs.
//!
//! The exact P-DPP law is available by enumeration for small instances, and
//! its normaliser `sum_{T in B} det(V_T V_Tᵀ)` also through coefficient
//! extraction from `det(I + sum_i y_i V_{X_i}ᵀ V_{X_i})`.

use nalgebra::{Complex, DMatrix};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    binomial, enumerate_fair_family, fair_family_size, k_subsets, PartitionedDataset, QuotaVector,
    SampleSet,
};
use crate::distribution::{DistributionTable, Support};
use crate::error::{Error, Result};
use crate::linalg::{
    dot, elementary_symmetric, log_volume_det, scale_tail_singular_values, singular_values, Matrix,
    RELATIVE_ZERO_TOLERANCE,
};
use crate::logvalue::LogValue;

/// Most parts the coefficient-extraction normaliser accepts.
pub const MAX_COEFFICIENT_PARTS: usize = 4;

/// Most evaluation points the coefficient-extraction normaliser accepts.
pub const MAX_COEFFICIENT_GRID: u128 = 2_000_000;

/// Order in which unfilled parts are visited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartOrder {
    /// Ascending part index, all of part `i` before part `i + 1`.
    #[default]
    Consecutive,
    /// One draw per unfilled part in turn.
    RoundRobin,
}

impl PartOrder {
    /// The part drawn at each of the `k` steps.
    pub fn schedule(self, quotas: &[usize]) -> Vec<usize> {
        match self {
            PartOrder::Consecutive => quotas
                .iter()
                .enumerate()
                .flat_map(|(i, &k)| std::iter::repeat_n(i, k))
                .collect(),
            PartOrder::RoundRobin => {
                let mut remaining = quotas.to_vec();
                let mut out = Vec::with_capacity(quotas.iter().sum());
                while remaining.iter().any(|&r| r > 0) {
                    for (i, r) in remaining.iter_mut().enumerate() {
                        if *r > 0 {
                            out.push(i);
                            *r -= 1;
                        }
                    }
                }
                out
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplerConfig {
    pub seed: u64,
    pub part_order: PartOrder,
    /// Residual squared norms below this multiple of the largest initial
    /// squared row norm count as zero.
    pub zero_tolerance: f64,
}

impl SamplerConfig {
    pub fn new(seed: u64) -> Self {
        SamplerConfig {
            seed,
            part_order: PartOrder::Consecutive,
            zero_tolerance: RELATIVE_ZERO_TOLERANCE,
        }
    }

    pub fn with_part_order(mut self, order: PartOrder) -> Self {
        self.part_order = order;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.zero_tolerance > 0.0 && self.zero_tolerance.is_finite() {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "zero tolerance must be positive, got {}",
                self.zero_tolerance
            )))
        }
    }
}

/// Mixes a master seed and a stream index into an independent child seed
/// (SplitMix64 finaliser).
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Working vectors for one run of the projection sampler.
struct ProjectionState {
    dim: usize,
    work: Vec<f64>,
    norms: Vec<f64>,
    selected: Vec<bool>,
    zero_below: f64,
}

impl ProjectionState {
    fn new(features: &Matrix, zero_tolerance: f64) -> Self {
        let work = features.to_row_major();
        let dim = features.ncols();
        let norms: Vec<f64> = work.chunks_exact(dim).map(|r| dot(r, r)).collect();
        let scale = norms.iter().copied().fold(0.0, f64::max);
        ProjectionState {
            dim,
            work,
            norms,
            selected: vec![false; features.nrows()],
            zero_below: zero_tolerance * scale,
        }
    }

    fn weight(&self, x: usize) -> f64 {
        if self.selected[x] || self.norms[x] <= self.zero_below {
            0.0
        } else {
            self.norms[x]
        }
    }

    /// Inverse-CDF draw over `members`; ties go to the lower index.
    fn draw(&self, members: &[usize], rng: &mut impl Rng) -> Option<usize> {
        let total: f64 = members.iter().map(|&x| self.weight(x)).sum();
        if !(total > 0.0) {
            return None;
        }
        let target = rng.random::<f64>() * total;
        let mut cumulative = 0.0;
        let mut last_positive = None;
        for &x in members {
            let w = self.weight(x);
            if w > 0.0 {
                cumulative += w;
                last_positive = Some(x);
                if cumulative > target {
                    return Some(x);
                }
            }
        }
        last_positive
    }

    /// `w_x <- w_x - (<w_x, v>/|v|^2) v` for every row, with `v = w_chosen`.
    fn select_and_project(&mut self, chosen: usize) {
        let n = self.dim;
        let v = self.work[chosen * n..(chosen + 1) * n].to_vec();
        let vv = dot(&v, &v);
        self.selected[chosen] = true;
        for (row, norm) in self.work.chunks_exact_mut(n).zip(self.norms.iter_mut()) {
            let c = dot(row, &v) / vv;
            if c != 0.0 {
                row.iter_mut().zip(&v).for_each(|(w, vi)| *w -= c * vi);
            }
            *norm = dot(row, row);
        }
    }
}

/// Runs the projection sampler over `groups[i] = (members, ...)` following
/// `schedule`; returns the chosen rows in draw order.
fn project_and_draw(
    features: &Matrix,
    groups: &[&[usize]],
    schedule: &[usize],
    zero_tolerance: f64,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    let mut state = ProjectionState::new(features, zero_tolerance);
    let mut chosen = Vec::with_capacity(schedule.len());
    for &g in schedule {
        let x = state.draw(groups[g], rng).ok_or_else(|| {
            Error::degenerate(
                Some(g),
                format!(
                    "all residual norms vanished after {} of {} draws",
                    chosen.len(),
                    schedule.len()
                ),
            )
        })?;
        state.select_and_project(x);
        chosen.push(x);
    }
    Ok(chosen)
}

fn into_set(mut rows: Vec<usize>) -> SampleSet {
    rows.sort_unstable();
    SampleSet::new(rows).expect("samplers never repeat an item")
}

/// Sample-and-Project for the partition-constrained DPP.
///
/// The output always satisfies the quotas. Fails with
/// [`Error::Degenerate`] naming the part whose residual mass vanished.
pub fn sample_and_project(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    cfg: &SamplerConfig,
) -> Result<SampleSet> {
    cfg.validate()?;
    check_quotas_match(ds, quotas)?;
    let groups: Vec<&[usize]> = ds.parts().iter().map(Vec::as_slice).collect();
    let schedule = cfg.part_order.schedule(quotas.as_slice());
    let mut rng = rng_for(cfg.seed);
    project_and_draw(ds.features(), &groups, &schedule, cfg.zero_tolerance, &mut rng).map(into_set)
}

fn check_quotas_match(ds: &PartitionedDataset, quotas: &QuotaVector) -> Result<()> {
    if quotas.num_parts() != ds.num_parts() {
        return Err(Error::InvalidQuota(format!(
            "{} quotas for {} parts",
            quotas.num_parts(),
            ds.num_parts()
        )));
    }
    for (i, (&k, size)) in quotas.as_slice().iter().zip(ds.part_sizes()).enumerate() {
        if k > size {
            return Err(Error::InvalidQuota(format!(
                "quota {k} for part {i} exceeds its {size} rows"
            )));
        }
    }
    Ok(())
}

/// Unconstrained k-DPP sample via sequential volume sampling.
pub fn sample_kdpp(features: &Matrix, k: usize, cfg: &SamplerConfig) -> Result<SampleSet> {
    cfg.validate()?;
    if k > features.ncols() || k > features.nrows() {
        return Err(Error::domain(format!(
            "k = {k} exceeds the matrix shape {}x{}",
            features.nrows(),
            features.ncols()
        )));
    }
    let all: Vec<usize> = (0..features.nrows()).collect();
    let mut rng = rng_for(cfg.seed);
    match project_and_draw(features, &[&all], &vec![0; k], cfg.zero_tolerance, &mut rng) {
        Ok(rows) => Ok(into_set(rows)),
        Err(Error::Degenerate { reason, .. }) => Err(Error::degenerate(
            None,
            format!("rank below k = {k}: {reason}"),
        )),
        Err(e) => Err(e),
    }
}

/// Independent per-part k_i-DPP samples, unioned.
pub fn sample_ki_dpp(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    cfg: &SamplerConfig,
) -> Result<SampleSet> {
    cfg.validate()?;
    check_quotas_match(ds, quotas)?;
    let mut rng = rng_for(cfg.seed);
    let mut chosen = Vec::with_capacity(quotas.total());
    for (i, part) in ds.parts().iter().enumerate() {
        let k_i = quotas.get(i);
        if k_i == 0 {
            continue;
        }
        let local: Vec<usize> = (0..part.len()).collect();
        let rows = project_and_draw(&ds.part_matrix(i), &[&local], &vec![0; k_i], cfg.zero_tolerance, &mut rng)
            .map_err(|e| match e {
                Error::Degenerate { reason, .. } => {
                    Error::degenerate(Some(i), format!("part rank below k_i = {k_i}: {reason}"))
                }
                other => other,
            })?;
        chosen.extend(rows.into_iter().map(|r| part[r]));
    }
    Ok(into_set(chosen))
}

/// Uniform member of the fair family (k_i-UNIF).
pub fn sample_uniform_constrained(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    seed: u64,
) -> Result<SampleSet> {
    check_quotas_match(ds, quotas)?;
    let mut rng = rng_for(seed);
    let mut chosen = Vec::with_capacity(quotas.total());
    for (i, part) in ds.parts().iter().enumerate() {
        let picks = index::sample(&mut rng, part.len(), quotas.get(i));
        chosen.extend(picks.into_iter().map(|j| part[j]));
    }
    Ok(into_set(chosen))
}

/// Uniform `k`-subset of `0..m` (UNIF).
pub fn sample_uniform(m: usize, k: usize, seed: u64) -> Result<SampleSet> {
    if k > m {
        return Err(Error::domain(format!("cannot choose {k} of {m} items")));
    }
    let mut rng = rng_for(seed);
    Ok(into_set(index::sample(&mut rng, m, k).into_vec()))
}

/// The exact P-DPP law, by enumeration of the fair family.
pub fn exact_pdpp_distribution(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    cap: u128,
) -> Result<DistributionTable> {
    let weights: Vec<(SampleSet, LogValue)> = enumerate_fair_family(ds, quotas, cap)?
        .map(|s| {
            let w = log_volume_det(&s.rows(ds.features()));
            (s, w)
        })
        .collect();
    DistributionTable::from_log_weights(
        weights,
        Support::Fair {
            quotas: quotas.clone(),
        },
    )
}

/// The exact k-DPP law over all `k`-subsets, by enumeration.
pub fn exact_kdpp_distribution(features: &Matrix, k: usize, cap: u128) -> Result<DistributionTable> {
    let size = binomial(features.nrows(), k);
    if size > cap {
        return Err(Error::CapExceeded { size, cap });
    }
    let weights: Vec<(SampleSet, LogValue)> = k_subsets(features.nrows(), k)
        .map(|s| {
            let w = log_volume_det(&s.rows(features));
            (s, w)
        })
        .collect();
    DistributionTable::from_log_weights(weights, Support::Size { k })
}

/// `log sum_{T in B} det(V_T V_Tᵀ)`.
///
/// Enumerates the fair family when it fits under `cap`, otherwise falls back
/// to coefficient extraction for up to [`MAX_COEFFICIENT_PARTS`] parts.
pub fn constrained_log_volume_sum(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    cap: u128,
) -> Result<LogValue> {
    let size = fair_family_size(ds, quotas);
    if size <= cap {
        return constrained_log_volume_sum_enumerated(ds, quotas, cap);
    }
    match constrained_log_volume_sum_by_coefficients(ds, quotas) {
        Err(Error::Domain(_)) => Err(Error::CapExceeded { size, cap }),
        other => other,
    }
}

pub fn constrained_log_volume_sum_enumerated(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    cap: u128,
) -> Result<LogValue> {
    Ok(LogValue::sum(
        enumerate_fair_family(ds, quotas, cap)?.map(|s| log_volume_det(&s.rows(ds.features()))),
    ))
}

/// The normaliser as the coefficient of `prod_i y_i^{k_i}` in
/// `f(y) = det(I_n + sum_i y_i G_i)`, `G_i = V_{X_i}ᵀ V_{X_i}`.
///
/// `f` has degree at most `d_i = min(|X_i|, n)` in `y_i`, so sampling each
/// variable at `d_i + 1` points `r_i * exp(2πi t / (d_i + 1))` on a circle and
/// applying the discrete Fourier transform recovers every coefficient exactly
/// in exact arithmetic. Radii are tilted so the wanted term dominates, which
/// keeps the extraction well conditioned; determinants are accumulated in the
/// log domain.
pub fn constrained_log_volume_sum_by_coefficients(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
) -> Result<LogValue> {
    check_quotas_match(ds, quotas)?;
    let n = ds.dim();
    let active: Vec<usize> = (0..ds.num_parts()).filter(|&i| quotas.get(i) > 0).collect();
    if active.len() > MAX_COEFFICIENT_PARTS {
        return Err(Error::domain(format!(
            "coefficient extraction supports at most {MAX_COEFFICIENT_PARTS} non-empty quotas, got {}",
            active.len()
        )));
    }
    if active.is_empty() {
        return Ok(LogValue::ONE);
    }

    // Normalised Gram matrices G_i / c_i; the coefficient picks up prod c_i^{k_i}.
    let mut grams = Vec::with_capacity(active.len());
    let mut log_scale = 0.0;
    let mut degrees = Vec::with_capacity(active.len());
    for &i in &active {
        let v = ds.part_matrix(i).into_dmatrix();
        let g = v.transpose() * &v;
        let c = g.trace();
        let k_i = quotas.get(i);
        let d_i = ds.part(i).len().min(n);
        if c <= 0.0 || k_i > d_i {
            return Ok(LogValue::ZERO);
        }
        log_scale += k_i as f64 * c.ln();
        grams.push(g / c);
        degrees.push(d_i);
    }
    let grid: u128 = degrees.iter().map(|&d| d as u128 + 1).product();
    if grid > MAX_COEFFICIENT_GRID {
        return Err(Error::domain(format!(
            "coefficient grid of {grid} points exceeds {MAX_COEFFICIENT_GRID}"
        )));
    }
    let targets: Vec<usize> = active.iter().map(|&i| quotas.get(i)).collect();
    let radii = tilted_radii(&grams, &targets, n);

    let points: Vec<usize> = degrees.iter().map(|&d| d + 1).collect();
    let total_points: usize = points.iter().product();
    let mut log_values: Vec<Complex<f64>> = Vec::with_capacity(total_points);
    let mut phase_index = vec![0usize; points.len()];
    for _ in 0..total_points {
        let mut a = DMatrix::<Complex<f64>>::identity(n, n);
        for (axis, g) in grams.iter().enumerate() {
            let angle = std::f64::consts::TAU * phase_index[axis] as f64 / points[axis] as f64;
            let y = Complex::from_polar(radii[axis], angle);
            a.zip_apply(g, |entry, gij| *entry += y * gij);
        }
        log_values.push(complex_log_det(a));
        // odometer
        for axis in (0..points.len()).rev() {
            phase_index[axis] += 1;
            if phase_index[axis] < points[axis] {
                break;
            }
            phase_index[axis] = 0;
        }
    }

    // coefficient = prod_i 1/(N_i r_i^{k_i}) * sum_t f(t) * exp(-2πi sum_i k_i t_i / N_i)
    let shift = log_values.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let mut acc = Complex::new(0.0, 0.0);
    let mut magnitude = 0.0;
    phase_index.iter_mut().for_each(|t| *t = 0);
    for lv in &log_values {
        let mut angle = lv.im;
        for axis in 0..points.len() {
            angle -= std::f64::consts::TAU * (targets[axis] * phase_index[axis]) as f64
                / points[axis] as f64;
        }
        let term = Complex::from_polar((lv.re - shift).exp(), angle);
        magnitude += term.norm();
        acc += term;
        for axis in (0..points.len()).rev() {
            phase_index[axis] += 1;
            if phase_index[axis] < points[axis] {
                break;
            }
            phase_index[axis] = 0;
        }
    }
    if acc.re <= 1e-12 * magnitude {
        return Ok(LogValue::ZERO);
    }
    let log_coefficient = acc.re.ln() + shift
        - (total_points as f64).ln()
        - radii
            .iter()
            .zip(&targets)
            .map(|(r, &k)| k as f64 * r.ln())
            .sum::<f64>();
    Ok(LogValue::from_ln(log_coefficient + log_scale))
}

/// `ln det` of a complex matrix as `ln|det| + i arg(det)`.
fn complex_log_det(a: DMatrix<Complex<f64>>) -> Complex<f64> {
    let lu = a.lu();
    let parity: f64 = lu.p().determinant();
    let u = lu.u();
    let mut out = Complex::new(0.0, if parity < 0.0 { std::f64::consts::PI } else { 0.0 });
    for d in u.diagonal().iter() {
        out += d.ln();
    }
    out
}

/// Picks `y_i > 0` so that under the weights `prod y_i^{|S∩X_i|} det(V_S V_Sᵀ)`
/// the expected count in part `i` is close to `k_i`. The expected count is
/// `tr(y_i G_i (I + sum_j y_j G_j)^{-1})`.
fn tilted_radii(grams: &[DMatrix<f64>], targets: &[usize], n: usize) -> Vec<f64> {
    let mut y = vec![1.0; grams.len()];
    for _ in 0..200 {
        let mut a = DMatrix::<f64>::identity(n, n);
        for (g, yi) in grams.iter().zip(&y) {
            a += g * *yi;
        }
        let Some(inv) = a.try_inverse() else { break };
        let mut max_change: f64 = 0.0;
        for (i, g) in grams.iter().enumerate() {
            let expected = y[i] * (g * &inv).trace();
            if expected <= 0.0 {
                continue;
            }
            let ratio = (targets[i] as f64 / expected).clamp(0.25, 4.0);
            max_change = max_change.max((ratio - 1.0).abs());
            y[i] *= ratio;
        }
        if max_change < 1e-6 {
            break;
        }
    }
    y.iter().map(|v| v.clamp(1e-12, 1e12)).collect()
}

/// Shrinks every part's singular values past its quota by `factor`.
pub fn scale_part_tails(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    factor: f64,
) -> Result<PartitionedDataset> {
    check_quotas_match(ds, quotas)?;
    let n = ds.dim();
    let mut data = vec![0.0; ds.num_rows() * n];
    for (i, part) in ds.parts().iter().enumerate() {
        let pm = ds.part_matrix(i);
        let keep = quotas.get(i).min(pm.nrows().min(pm.ncols()));
        let scaled = scale_tail_singular_values(&pm, keep, factor)?;
        for (local, &row) in part.iter().enumerate() {
            data[row * n..(row + 1) * n].copy_from_slice(&scaled.row(local));
        }
    }
    ds.with_features(Matrix::from_row_major(ds.num_rows(), n, &data)?)
}

/// Scale-and-Sample: shrink each part's tail singular values by `1/n`, then
/// draw an unconstrained k-DPP sample of size `sum k_i`.
///
/// The result is not guaranteed to meet the quotas.
pub fn scale_and_sample(
    ds: &PartitionedDataset,
    quotas: &QuotaVector,
    cfg: &SamplerConfig,
) -> Result<SampleSet> {
    let scaled = scale_part_tails(ds, quotas, 1.0 / ds.dim() as f64)?;
    sample_kdpp(scaled.features(), quotas.total(), cfg)
}

/// `log e_k(σ_1^2, ..., σ_n^2) = log sum_{|S|=k} det(V_S V_Sᵀ)`.
pub fn unconstrained_log_volume_sum(features: &Matrix, k: usize) -> Result<LogValue> {
    let squared = singular_values(features).padded(features.ncols()).squared();
    elementary_symmetric(&squared, k)
}
