//! Dense linear-algebra primitives used by the samplers and diagnostics.
//!
//! Determinants are never materialised: both volume routes return a
//! [`LogValue`]. Singular value decompositions are delegated to `nalgebra`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logvalue::LogValue;

/// A squared residual is treated as zero below this multiple of the largest
/// initial squared row norm.
pub const RELATIVE_ZERO_TOLERANCE: f64 = 1e-12;

/// Residual-to-original norm ratio that triggers a second projection pass.
const REORTHOGONALIZE_BELOW: f64 = 1e-6;

/// An `m x n` real matrix whose rows are item feature vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    inner: DMatrix<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::domain(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::domain(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(bad) = rows.iter().position(|r| r.as_ref().len() != cols) {
            return Err(Error::domain(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].as_ref().len()
            )));
        }
        let data: Vec<f64> = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::from_row_major(rows.len(), cols, &data)
    }

    pub fn from_dmatrix(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return Err(Error::domain("matrix must have at least one row and column"));
        }
        if let Some(pos) = inner.iter().position(|x| !x.is_finite()) {
            let (r, c) = (pos % inner.nrows(), pos / inner.nrows());
            return Err(Error::domain(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(Matrix { inner })
    }

    pub fn identity(n: usize) -> Self {
        Matrix {
            inner: DMatrix::identity(n.max(1), n.max(1)),
        }
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.inner.row(i).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.nrows()).map(|i| self.row(i)).collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.inner.transpose().as_slice().to_vec()
    }

    /// Sub-matrix made of the listed rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Matrix> {
        if indices.is_empty() {
            return Err(Error::domain("cannot select an empty set of rows"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.nrows()) {
            return Err(Error::domain(format!(
                "row index {bad} out of range for {} rows",
                self.nrows()
            )));
        }
        Ok(Matrix {
            inner: self.inner.select_rows(indices),
        })
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix {
            inner: &self.inner * factor,
        }
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.inner
    }

    /// Largest squared row norm, the reference scale for rank decisions.
    pub fn max_squared_row_norm(&self) -> f64 {
        self.inner
            .row_iter()
            .map(|r| r.norm_squared())
            .fold(0.0, f64::max)
    }
}

/// Singular values in non-increasing order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Sorts the values in non-increasing order; negatives are rejected.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::domain(format!("singular value {bad} is not a finite non-negative number")));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Spectrum(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `j`-th largest value (zero-based), zero past the end.
    pub fn get(&self, j: usize) -> f64 {
        self.0.get(j).copied().unwrap_or(0.0)
    }

    pub fn largest(&self) -> f64 {
        self.get(0)
    }

    /// The spectrum zero-padded (or truncated) to exactly `len` values.
    pub fn padded(&self, len: usize) -> Spectrum {
        Spectrum((0..len).map(|j| self.get(j)).collect())
    }

    pub fn squared(&self) -> Vec<f64> {
        self.0.iter().map(|s| s * s).collect()
    }

    /// Number of values above `rel_tol` times the largest one.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let cutoff = self.largest() * rel_tol;
        self.0.iter().filter(|&&s| s > cutoff && s > 0.0).count()
    }
}

/// Thin SVD `A = U diag(s) Vᵀ` with singular values sorted non-increasingly.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v_t: DMatrix<f64>,
}

impl SortedSvd {
    pub fn new(a: &Matrix) -> SortedSvd {
        let svd = a.as_dmatrix().clone().svd(true, true);
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let values = svd.singular_values;
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
        SortedSvd {
            u: u.select_columns(&order),
            singular_values: order.iter().map(|&i| values[i].max(0.0)).collect(),
            v_t: v_t.select_rows(&order),
        }
    }

    pub fn reconstruct(&self, values: &[f64]) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in values.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * &self.v_t
    }
}

/// Orthogonal projection of `w` onto the complement of `v`:
/// `w - (<w, v> / |v|^2) v`.
pub fn project_orthogonal(w: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if w.len() != v.len() {
        return Err(Error::domain(format!(
            "dimension mismatch: {} vs {}",
            w.len(),
            v.len()
        )));
    }
    let vv = dot(v, v);
    if vv <= 0.0 {
        return Err(Error::domain("cannot project against the zero vector"));
    }
    let coef = dot(w, v) / vv;
    Ok(w.iter().zip(v).map(|(wi, vi)| wi - coef * vi).collect())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `log det(W Wᵀ)` computed as the product of squared residual norms under
/// sequential Gram-Schmidt orthogonalisation.
///
/// Linearly dependent rows give [`LogValue::ZERO`]; more rows than columns
/// are always dependent. The empty product is one.
pub fn log_volume_det<R: AsRef<[f64]>>(rows: &[R]) -> LogValue {
    if rows.is_empty() {
        return LogValue::ONE;
    }
    let n = rows[0].as_ref().len();
    if rows.len() > n {
        return LogValue::ZERO;
    }
    let scale = rows
        .iter()
        .map(|r| dot(r.as_ref(), r.as_ref()))
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return LogValue::ZERO;
    }
    let zero_below = RELATIVE_ZERO_TOLERANCE * scale;

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    let mut log_volume = 0.0;
    for row in rows {
        let row = row.as_ref();
        let original = dot(row, row);
        let mut residual = row.to_vec();
        remove_components(&mut residual, &basis);
        let mut norm_sq = dot(&residual, &residual);
        if norm_sq < REORTHOGONALIZE_BELOW * REORTHOGONALIZE_BELOW * original {
            remove_components(&mut residual, &basis);
            norm_sq = dot(&residual, &residual);
        }
        if norm_sq <= zero_below {
            return LogValue::ZERO;
        }
        log_volume += norm_sq.ln();
        let norm = norm_sq.sqrt();
        residual.iter_mut().for_each(|x| *x /= norm);
        basis.push(residual);
    }
    LogValue::from_ln(log_volume)
}

fn remove_components(residual: &mut [f64], basis: &[Vec<f64>]) {
    for q in basis {
        let c = dot(residual, q);
        residual.iter_mut().zip(q).for_each(|(r, qi)| *r -= c * qi);
    }
}

/// `log det(W Wᵀ)` through an explicit Gram matrix and Cholesky pivots.
///
/// Numerically independent of [`log_volume_det`]; the two are cross-checked
/// in tests.
pub fn gram_log_det<R: AsRef<[f64]>>(rows: &[R]) -> LogValue {
    let k = rows.len();
    if k == 0 {
        return LogValue::ONE;
    }
    let mut gram = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let g = dot(rows[i].as_ref(), rows[j].as_ref());
            gram[i * k + j] = g;
            gram[j * k + i] = g;
        }
    }
    let scale = (0..k).map(|i| gram[i * k + i]).fold(0.0, f64::max);
    if scale == 0.0 {
        return LogValue::ZERO;
    }
    let zero_below = RELATIVE_ZERO_TOLERANCE * scale;

    // In-place lower Cholesky factor; each pivot is a squared residual norm.
    let mut log_det = 0.0;
    for j in 0..k {
        let mut pivot = gram[j * k + j];
        for t in 0..j {
            pivot -= gram[j * k + t] * gram[j * k + t];
        }
        if pivot <= zero_below {
            return LogValue::ZERO;
        }
        log_det += pivot.ln();
        let d = pivot.sqrt();
        gram[j * k + j] = d;
        for i in (j + 1)..k {
            let mut s = gram[i * k + j];
            for t in 0..j {
                s -= gram[i * k + t] * gram[j * k + t];
            }
            gram[i * k + j] = s / d;
        }
    }
    LogValue::from_ln(log_det)
}

/// Singular values of `a`, non-increasing, `min(m, n)` of them.
pub fn singular_values(a: &Matrix) -> Spectrum {
    let values = a.as_dmatrix().singular_values();
    Spectrum::new(values.iter().map(|s| s.max(0.0)).collect()).expect("svd yields finite values")
}

/// Elementary symmetric polynomial `e_k(values)` evaluated in the log domain.
///
/// Uses the degree-by-degree recurrence
/// `e_j <- e_j + x * e_{j-1}` over the values in descending order. All terms
/// are non-negative so no cancellation occurs.
pub fn elementary_symmetric(values: &[f64], k: usize) -> Result<LogValue> {
    if k > values.len() {
        return Err(Error::domain(format!(
            "e_{k} requested over only {} values",
            values.len()
        )));
    }
    if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::domain(format!("value {bad} is not finite and non-negative")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));

    // ln e_j over the prefix processed so far.
    let mut ln_e = vec![f64::NEG_INFINITY; k + 1];
    ln_e[0] = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        if *x == 0.0 {
            break;
        }
        let ln_x = x.ln();
        for j in (1..=k.min(i + 1)).rev() {
            ln_e[j] = log_add(ln_e[j], ln_x + ln_e[j - 1]);
        }
    }
    Ok(LogValue::from_ln(ln_e[k]))
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Rebuilds `a` from its SVD with every singular value past the first `keep`
/// multiplied by `factor`.
pub fn scale_tail_singular_values(a: &Matrix, keep: usize, factor: f64) -> Result<Matrix> {
    let rank_cap = a.nrows().min(a.ncols());
    if keep > rank_cap {
        return Err(Error::domain(format!(
            "keep = {keep} exceeds min(m, n) = {rank_cap}"
        )));
    }
    if !(factor.is_finite() && factor >= 0.0) {
        return Err(Error::domain(format!("scaling factor {factor} must be finite and non-negative")));
    }
    if keep == rank_cap || factor == 1.0 {
        return Ok(a.clone());
    }
    let svd = SortedSvd::new(a);
    let values: Vec<f64> = svd
        .singular_values
        .iter()
        .enumerate()
        .map(|(j, s)| if j < keep { *s } else { s * factor })
        .collect();
    Matrix::from_dmatrix(svd.reconstruct(&values))
}

/// Best rank-`k` approximation in Frobenius norm.
pub fn truncate_rank(a: &Matrix, k: usize) -> Result<Matrix> {
    scale_tail_singular_values(a, k.min(a.nrows().min(a.ncols())), 0.0)
}

/// Squared Frobenius norm.
pub fn frobenius_sq(a: &DMatrix<f64>) -> f64 {
    a.norm_squared()
}
