#![allow(dead_code)]

use std::collections::BTreeMap;

use fairdpp::{DistributionTable, Matrix, SampleSet, Support};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(m: usize, n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    Matrix::from_row_major(m, n, &data).unwrap()
}

/// `det(A Aᵀ)` by cofactor-free Gaussian elimination with partial pivoting.
pub fn gram_det(rows: &[Vec<f64>]) -> f64 {
    let k = rows.len();
    if k == 0 {
        return 1.0;
    }
    let mut g: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum()).collect())
        .collect();
    let mut det = 1.0;
    for c in 0..k {
        let p = (c..k).max_by(|&a, &b| g[a][c].abs().total_cmp(&g[b][c].abs())).unwrap();
        if g[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            g.swap(p, c);
            det = -det;
        }
        det *= g[c][c];
        for r in c + 1..k {
            let f = g[r][c] / g[c][c];
            for j in c..k {
                g[r][j] -= f * g[c][j];
            }
        }
    }
    det
}

/// Exact output law of the sequential projection sampler, by walking every
/// draw path. Returns the table over completed sets and the mass of paths
/// that hit an all-zero group.
pub struct SequentialLaw {
    pub sets: BTreeMap<SampleSet, f64>,
    pub degenerate: f64,
}

impl SequentialLaw {
    pub fn table(&self) -> DistributionTable {
        let total: f64 = self.sets.values().sum();
        let entries = self.sets.iter().map(|(s, p)| (s.clone(), p / total)).collect();
        DistributionTable::new(entries, Support::Empirical).unwrap()
    }
}

pub fn sequential_law(features: &Matrix, groups: &[Vec<usize>], schedule: &[usize]) -> SequentialLaw {
    let w = features.as_dmatrix().clone();
    let scale = (0..w.nrows()).map(|i| w.row(i).norm_squared()).fold(0.0, f64::max);
    let mut law = SequentialLaw {
        sets: BTreeMap::new(),
        degenerate: 0.0,
    };
    walk(&w, groups, schedule, 1e-12 * scale, &mut Vec::new(), 1.0, &mut law);
    law
}

fn walk(
    w: &DMatrix<f64>,
    groups: &[Vec<usize>],
    schedule: &[usize],
    zero: f64,
    chosen: &mut Vec<usize>,
    mass: f64,
    law: &mut SequentialLaw,
) {
    let Some((&g, rest)) = schedule.split_first() else {
        let set = SampleSet::new(chosen.clone()).unwrap();
        *law.sets.entry(set).or_default() += mass;
        return;
    };
    let weights: Vec<(usize, f64)> = groups[g]
        .iter()
        .filter(|x| !chosen.contains(x))
        .map(|&x| (x, w.row(x).norm_squared()))
        .filter(|&(_, n)| n > zero)
        .collect();
    let total: f64 = weights.iter().map(|(_, n)| n).sum();
    if weights.is_empty() {
        law.degenerate += mass;
        return;
    }
    for (x, nx) in weights {
        let v = w.row(x).transpose();
        let vv = v.norm_squared();
        let mut next = w.clone();
        for r in 0..next.nrows() {
            let c = next.row(r).dot(&v.transpose()) / vv;
            let upd = next.row(r) - v.transpose() * c;
            next.set_row(r, &upd);
        }
        chosen.push(x);
        walk(&next, groups, rest, zero, chosen, mass * nx / total, law);
        chosen.pop();
    }
}

/// Upper 1% point of the chi-square distribution, for the degrees of
/// freedom used in these tests.
pub fn chi_square_01(df: usize) -> f64 {
    match df {
        1 => 6.635,
        3 => 11.345,
        17 => 33.409,
        60 => 88.379,
        _ => panic!("no tabulated value for df = {df}"),
    }
}

pub fn chi_square(counts: &[usize], expected: &[f64]) -> f64 {
    counts
        .iter()
        .zip(expected)
        .map(|(&c, &e)| (c as f64 - e).powi(2) / e)
        .sum()
}
