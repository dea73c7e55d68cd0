//! Seeded synthetic inputs: Gaussian feature matrices and a census-style CSV.

use std::fmt::Write as _;

use fairdpp::{Matrix, PartitionedDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::Result;

/// I.i.d. standard normal `m × n` matrix.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    Matrix::from_row_major(m, n, &data).expect("finite gaussian entries")
}

/// Gaussian rows, the first `sizes[0]` in part 0, the next `sizes[1]` in part 1, ...
pub fn gaussian_partitioned(sizes: &[usize], n: usize, seed: u64) -> Result<PartitionedDataset> {
    let m = sizes.iter().sum();
    let labels = sizes.iter().enumerate().flat_map(|(i, &s)| vec![i; s]).collect();
    Ok(PartitionedDataset::new(gaussian_matrix(m, n, seed), labels)?)
}

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[(&'a str, f64)]) -> &'a str {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (name, p) in options {
        acc += p;
        if u < acc {
            return name;
        }
    }
    options.last().unwrap().0
}

/// A census-like table with numeric and categorical fields (including a
/// continuous sampling weight `fnlwgt`), a `gender`
/// column split roughly 68/32, a `race` column split roughly 86/14, and about
/// 2% of rows carrying a `?` field.
pub fn census_like_csv(rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hours_noise = Normal::new(0.0, 8.0).unwrap();
    let mut out = String::from("age,workclass,fnlwgt,education_num,marital_status,occupation,race,gender,capital_gain,hours_per_week,income\n");
    for _ in 0..rows {
        let gender = pick(&mut rng, &[("Male", 0.683), ("Female", 0.317)]);
        let race = pick(&mut rng, &[("White", 0.857), ("Black", 0.1), ("Other", 0.043)]);
        let age: u32 = 17 + (rng.random::<f64>().powf(1.4) * 70.0) as u32;
        let edu: u32 = rng.random_range(1..=16);
        let workclass = pick(
            &mut rng,
            &[("Private", 0.7), ("Self-emp", 0.12), ("Gov", 0.14), ("Without-pay", 0.04)],
        );
        let marital = if age < 25 {
            pick(&mut rng, &[("Never-married", 0.8), ("Married", 0.2)])
        } else {
            pick(&mut rng, &[("Married", 0.55), ("Never-married", 0.25), ("Divorced", 0.15), ("Widowed", 0.05)])
        };
        let occupation = if gender == "Male" {
            pick(&mut rng, &[("Craft", 0.25), ("Exec", 0.2), ("Prof", 0.15), ("Sales", 0.15), ("Clerical", 0.1), ("Service", 0.15)])
        } else {
            pick(&mut rng, &[("Craft", 0.05), ("Exec", 0.12), ("Prof", 0.2), ("Sales", 0.15), ("Clerical", 0.28), ("Service", 0.2)])
        };
        let base_hours: f64 = if gender == "Male" { 43.0 } else { 37.0 };
        let hours = (base_hours + hours_noise.sample(&mut rng)).clamp(1.0, 99.0).round();
        let capital = if rng.random_bool(0.08) { (rng.random::<f64>() * 20_000.0).round() } else { 0.0 };
        let z: f64 = StandardNormal.sample(&mut rng);
        let fnlwgt = (12.0 + 0.5 * z).exp().round();
        let score = 0.15 * edu as f64 + 0.02 * age as f64 + 0.02 * hours + if marital == "Married" { 0.8 } else { 0.0 };
        let income = if score + rng.random::<f64>() > 3.6 { ">50K" } else { "<=50K" };

        let mut fields = [
            age.to_string(),
            workclass.to_owned(),
            fnlwgt.to_string(),
            edu.to_string(),
            marital.to_owned(),
            occupation.to_owned(),
            race.to_owned(),
            gender.to_owned(),
            capital.to_string(),
            hours.to_string(),
            income.to_owned(),
        ];
        if rng.random_bool(0.02) {
            let j = [1usize, 5][rng.random_range(0..2)];
            fields[j] = "?".into();
        }
        writeln!(out, "{}", fields.join(", ")).unwrap();
    }
    out
}
