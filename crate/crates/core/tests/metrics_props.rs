mod common;

use std::collections::BTreeMap;

use common::gaussian;
use fairdpp::metrics::{
    empirical_distribution, kl_divergence, summary_stats, total_variation, unfairness,
};
use fairdpp::samplers::derive_seed;
use fairdpp::{
    sample_and_project, sample_ki_dpp, sample_uniform_constrained, DistributionTable,
    PartitionedDataset, QuotaVector, SampleSet, SamplerConfig, Support, TargetFrequency,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table(weights: &[f64]) -> DistributionTable {
    let total: f64 = weights.iter().sum();
    let entries: BTreeMap<SampleSet, f64> = weights
        .iter()
        .enumerate()
        .map(|(i, w)| (SampleSet::new(vec![i]).unwrap(), w / total))
        .collect();
    DistributionTable::new(entries, Support::Empirical).unwrap()
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, 2..=12)
}

proptest! {
    #[test]
    fn kl_non_negative(a in weights(), b in weights()) {
        let n = a.len().min(b.len());
        let (ta, tb) = (table(&a[..n]), table(&b[..n]));
        prop_assert!(kl_divergence(&ta, &tb) >= 0.0);
        prop_assert!(kl_divergence(&ta, &ta).abs() < 1e-15);
        let tv = total_variation(&ta, &tb);
        prop_assert!((0.0..=1.0).contains(&tv));
    }

    #[test]
    fn conditional_kl_is_log_inverse_mass(w in weights(), mask in any::<u16>()) {
        let b = table(&w);
        let in_family = |s: &SampleSet| (mask >> s.indices()[0]) & 1 == 1;
        let mass = b.mass(in_family);
        prop_assume!(mass > 0.0);
        let cond = b.conditional(in_family, Support::Empirical).unwrap();
        prop_assert!((kl_divergence(&cond, &b) + mass.ln()).abs() < 1e-12);
    }

    #[test]
    fn unfairness_non_negative(counts in prop::collection::vec(0usize..5, 2..=4), q in prop::collection::vec(0.0f64..1.0, 4)) {
        let total: usize = counts.iter().sum();
        prop_assume!(total > 0 && counts.iter().all(|&c| c > 0));
        let labels: Vec<usize> = counts.iter().enumerate().flat_map(|(i, &c)| vec![i; c]).collect();
        let ds = PartitionedDataset::new(gaussian(total, 2, 0), labels).unwrap();
        let q = &q[..counts.len()];
        let s: f64 = q.iter().sum();
        prop_assume!(s > 0.0);
        let mut norm: Vec<f64> = q.iter().map(|x| x / s).collect();
        let drift: f64 = 1.0 - norm.iter().sum::<f64>();
        norm[0] += drift;
        let target = TargetFrequency::new(norm).unwrap();
        let all = SampleSet::new((0..total).collect()).unwrap();
        prop_assert!(unfairness(&target, &all, &ds).unwrap() >= 0.0);
        prop_assert_eq!(unfairness(&TargetFrequency::proportional(&ds), &all, &ds).unwrap(), 0.0);
    }

    #[test]
    fn summary_invariants(values in prop::collection::vec(-100.0f64..100.0, 1..50)) {
        let s = summary_stats(&values).unwrap();
        prop_assert!(s.std >= 0.0 && s.sem <= s.std);
        prop_assert_eq!(s.count, values.len());
    }
}

#[test]
fn lemma1_minimality_by_random_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let size = rng.random_range(3..=12);
        let w: Vec<f64> = (0..size).map(|_| rng.random_range(0.01..1.0)).collect();
        let b = table(&w);
        let members: Vec<usize> = (0..size).filter(|_| rng.random_bool(0.5)).collect();
        if members.is_empty() {
            continue;
        }
        let in_family = |s: &SampleSet| members.contains(&s.indices()[0]);
        let best = kl_divergence(&b.conditional(in_family, Support::Empirical).unwrap(), &b);
        for _ in 0..10_000 {
            let raw: Vec<f64> = members.iter().map(|_| -rng.random::<f64>().ln()).collect();
            let total: f64 = raw.iter().sum();
            let entries = members
                .iter()
                .zip(&raw)
                .map(|(&i, r)| (SampleSet::new(vec![i]).unwrap(), r / total))
                .collect();
            let cand = DistributionTable::new(entries, Support::Empirical).unwrap();
            assert!(kl_divergence(&cand, &b) >= best - 1e-9);
        }
    }
}

#[test]
fn empirical_law_converges() {
    let truth = [0.1, 0.2, 0.3, 0.4];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let samples: Vec<SampleSet> = (0..100_000)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let i = truth.iter().position(|p| { acc += p; u < acc }).unwrap_or(3);
            SampleSet::new(vec![i]).unwrap()
        })
        .collect();
    let tv = total_variation(&empirical_distribution(&samples).unwrap(), &table(&truth));
    assert!(tv <= 0.01, "{tv}");
}

#[test]
fn constrained_outputs_have_zero_unfairness() {
    let ds = PartitionedDataset::new(gaussian(30, 8, 7), (0..30).map(|i| usize::from(i % 3 == 0)).collect()).unwrap();
    let q = QuotaVector::new(&ds, vec![3, 3]).unwrap();
    let target = TargetFrequency::uniform(2);
    for i in 0..200 {
        let seed = derive_seed(8, i);
        for s in [
            sample_and_project(&ds, &q, &SamplerConfig::new(seed)).unwrap(),
            sample_ki_dpp(&ds, &q, &SamplerConfig::new(seed)).unwrap(),
            sample_uniform_constrained(&ds, &q, seed).unwrap(),
        ] {
            assert_eq!(unfairness(&target, &s, &ds).unwrap(), 0.0);
        }
    }
}
