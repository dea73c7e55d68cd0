mod common;

use common::{gaussian, gram_det};
use fairdpp::dataset::k_subsets;
use fairdpp::linalg::{
    elementary_symmetric, frobenius_sq, gram_log_det, log_volume_det, scale_tail_singular_values,
    singular_values, truncate_rank,
};
use fairdpp::{LogValue, Matrix};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = (usize, usize, u64)> {
    (1usize..=8, 1usize..=6, any::<u64>())
}

fn rel_close(a: LogValue, b: LogValue, tol: f64) -> bool {
    a.sign() == b.sign()
        && (a.is_zero() || (a.log_magnitude() - b.log_magnitude()).abs() <= tol * (1.0 + b.log_magnitude().abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn volume_matches_gram((m, n, seed) in shape()) {
        let a = gaussian(m.min(n), n, seed);
        let rows = a.rows();
        let v = log_volume_det(&rows);
        let g = gram_log_det(&rows);
        prop_assert!(v.is_positive());
        prop_assert!(rel_close(v, g, 1e-8), "{v} vs {g}");
        prop_assert!((v.to_f64() / gram_det(&rows) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dependent_rows_have_zero_volume((m, n, seed) in (2usize..=6, 2usize..=6, any::<u64>()), c in -3.0f64..3.0) {
        let a = gaussian(m.min(n), n, seed);
        let mut rows = a.rows();
        let combo: Vec<f64> = rows[0].iter().zip(&rows[rows.len() - 1]).map(|(x, y)| c * x - 0.5 * y).collect();
        rows.push(combo);
        prop_assert!(log_volume_det(&rows).is_zero());
        prop_assert!(gram_log_det(&rows).is_zero());
    }

    #[test]
    fn volume_is_permutation_invariant((m, n, seed) in shape(), rot in 0usize..8) {
        let a = gaussian(m.min(n), n, seed);
        let rows = a.rows();
        let mut perm = rows.clone();
        perm.rotate_left(rot % rows.len());
        perm.reverse();
        prop_assert!(rel_close(log_volume_det(&perm), log_volume_det(&rows), 1e-8));
    }

    #[test]
    fn lemma3_identity((m, n, seed) in shape()) {
        let a = gaussian(m, n, seed);
        let sq = singular_values(&a).padded(n).squared();
        for k in 0..=m.min(n) {
            let e = elementary_symmetric(&sq, k).unwrap();
            let brute: f64 = k_subsets(m, k).map(|s| gram_det(&s.rows(&a))).sum();
            prop_assert!((e.to_f64() - brute).abs() <= 1e-6 * brute.abs().max(1e-300), "k={k}: {} vs {brute}", e.to_f64());
        }
    }

    #[test]
    fn lemma5_truncation((m, n, seed) in shape()) {
        let a = gaussian(m, n, seed);
        let s = singular_values(&a);
        for k in 0..=m.min(n) {
            let t = truncate_rank(&a, k).unwrap();
            let resid = frobenius_sq(&(a.as_dmatrix() - t.as_dmatrix()));
            let tail: f64 = s.values().iter().skip(k).map(|x| x * x).sum();
            prop_assert!((resid - tail).abs() <= 1e-8 * (1.0 + tail));
        }
    }

    #[test]
    fn spectrum_sorted_non_negative((m, n, seed) in shape()) {
        let s = singular_values(&gaussian(m, n, seed));
        prop_assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn tail_scaling_matches_eigen_oracle((m, n, seed) in (2usize..=8, 2usize..=6, any::<u64>()), keep in 0usize..6, f in 0.01f64..1.0) {
        let a = gaussian(m, n, seed);
        let keep = keep.min(m.min(n));
        let scaled = scale_tail_singular_values(&a, keep, f).unwrap();
        let eig = |x: &Matrix| {
            let g = x.as_dmatrix().transpose() * x.as_dmatrix();
            let mut v: Vec<f64> = SymmetricEigen::new(g).eigenvalues.iter().map(|e| e.max(0.0).sqrt()).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        };
        let before = eig(&a);
        let after = eig(&scaled);
        for j in 0..m.min(n) {
            let want = if j < keep { before[j] } else { f * before[j] };
            prop_assert!((after[j] - want).abs() <= 1e-8 * (1.0 + before[0]), "j={j}: {} vs {want}", after[j]);
        }
        // structural zeros of AᵀA come back as sqrt of rounding noise
        for &z in &after[m.min(n)..] {
            prop_assert!(z <= 1e-6 * (1.0 + before[0]), "{z}");
        }
    }
}

#[test]
fn large_spectrum_stays_finite() {
    let sq = vec![1e6; 1000];
    let e = elementary_symmetric(&sq, 500).unwrap();
    assert!(e.is_positive() && e.log_magnitude().is_finite());
    let ln_binom: f64 = (501..=1000).map(|t| (t as f64).ln()).sum::<f64>() - (1..=500).map(|t| (t as f64).ln()).sum::<f64>();
    let expect = ln_binom + 500.0 * 1e6f64.ln();
    assert!((e.log_magnitude() - expect).abs() < 1e-8 * expect);
}
