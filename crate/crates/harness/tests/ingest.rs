use std::io::Write;

use fairdpp_harness::ingest::{load_dataset, save_dataset};
use fairdpp_harness::synthetic::census_like_csv;
use fairdpp_harness::{ingest, HarnessError, IngestionConfig};
use tempfile::NamedTempFile;

fn csv_file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const SMALL: &str = "a, color, b, g\n1, red, 2, x\n2, blue, 0, y\n?, red, 1, x\n3, green, 5, y\n";

#[test]
fn one_hot_columns_and_missing_rows() {
    let f = csv_file(SMALL);
    let mut cfg = IngestionConfig::new(f.path(), "g", 0);
    cfg.categorical_columns = vec!["color".into()];
    let d = ingest(&cfg).unwrap();
    assert_eq!(d.dataset.num_rows(), 3);
    assert_eq!(d.column_names, ["a", "color=blue", "color=green", "color=red", "b"]);
    assert_eq!(d.label_names, ["x", "y"]);
    assert_eq!(d.dataset.labels(), &[0, 1, 1]);
    assert_eq!(d.dataset.features().row(1), vec![2.0, 1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn pairwise_products_bounded() {
    let f = csv_file(SMALL);
    let mut cfg = IngestionConfig::new(f.path(), "g", 0);
    cfg.categorical_columns = vec!["color".into()];
    cfg.pairwise_products = true;
    let plain = 5;
    let d = ingest(&cfg).unwrap();
    assert!(d.dataset.dim() <= plain + plain * (plain - 1) / 2);
    assert!(d.column_names.contains(&"a*b".to_string()));

    cfg.drop_redundant_columns = true;
    let r = ingest(&cfg).unwrap();
    assert!(r.dataset.dim() < d.dataset.dim());
    // one-hot products of distinct levels are identically zero
    assert!(!r.column_names.contains(&"color=blue*color=red".to_string()));
}

#[test]
fn census_ingest_deterministic() {
    let f = csv_file(&census_like_csv(500, 7));
    let mut cfg = IngestionConfig::new(f.path(), "gender", 3);
    cfg.categorical_columns = ["workclass", "marital_status", "occupation", "race", "income"]
        .map(String::from)
        .to_vec();
    cfg.subsample_size = Some(200);
    cfg.pairwise_products = true;
    cfg.drop_redundant_columns = true;
    cfg.standardize = true;
    let a = ingest(&cfg).unwrap();
    let b = ingest(&cfg).unwrap();
    assert_eq!(a.dataset.num_rows(), 200);
    assert_eq!(a.dataset.features().to_row_major(), b.dataset.features().to_row_major());
    assert_eq!(a.dataset.labels(), b.dataset.labels());
    assert_eq!(a.label_names, ["Female", "Male"]);

    let out = NamedTempFile::new().unwrap();
    save_dataset(&a, out.path()).unwrap();
    let back = load_dataset(out.path()).unwrap();
    assert_eq!(back.dataset.features().to_row_major(), a.dataset.features().to_row_major());
    assert_eq!(back.column_names, a.column_names);
}

#[test]
fn ingest_errors() {
    let f = csv_file(SMALL);
    let cfg = IngestionConfig::new(f.path(), "nope", 0);
    assert!(matches!(ingest(&cfg), Err(HarnessError::Config(_))));

    // `color` left numeric
    let cfg = IngestionConfig::new(f.path(), "g", 0);
    let e = ingest(&cfg).unwrap_err();
    assert!(matches!(e, HarnessError::Data(_)), "{e}");
    assert_eq!(e.exit_code(), 3);

    let mut cfg = IngestionConfig::new(f.path(), "g", 0);
    cfg.categorical_columns = vec!["color".into()];
    cfg.subsample_size = Some(10);
    assert!(matches!(ingest(&cfg), Err(HarnessError::Config(_))));

    let cfg = IngestionConfig::new("/nonexistent/file.csv", "g", 0);
    assert_eq!(ingest(&cfg).unwrap_err().exit_code(), 3);
}
