use std::path::Path;
use std::process::{Command, Output};

use fairdpp_harness::synthetic::census_like_csv;

fn fairdpp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fairdpp")).args(args).current_dir(dir).output().unwrap()
}

fn ingest(dir: &Path) {
    std::fs::write(dir.join("in.csv"), census_like_csv(120, 1)).unwrap();
    let out = fairdpp(
        &[
            "ingest", "--input", "in.csv", "--label-column", "gender",
            "--categorical", "workclass,marital_status,occupation,race,income",
            "--standardize", "--seed", "1", "--output", "d.json",
        ],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sample_and_experiment() {
    let dir = tempfile::tempdir().unwrap();
    ingest(dir.path());

    let out = fairdpp(&["sample", "--dataset", "d.json", "--k", "6", "--seed", "2"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["perPartCounts"], serde_json::json!([3, 3]));
    assert_eq!(v["indices"].as_array().unwrap().len(), 6);

    let again = fairdpp(&["sample", "--dataset", "d.json", "--k", "6", "--seed", "2"], dir.path());
    assert_eq!(out.stdout, again.stdout);

    let out = fairdpp(
        &["experiment", "--dataset", "d.json", "--k", "6", "--repetitions", "5", "--seed", "3", "--output", "r.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("r.csv.json").exists());

    let out = fairdpp(&["diagnose", "--dataset", "d.json", "--seed", "0"], dir.path());
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["balance"]["fullSpectrum"].is_array());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    ingest(dir.path());
    let code = |args: &[&str]| fairdpp(args, dir.path()).status.code().unwrap();

    assert_eq!(code(&["sample", "--dataset", "d.json", "--k", "6"]), 2);
    assert_eq!(code(&["sample", "--dataset", "d.json", "--k", "500", "--seed", "1"]), 2);
    assert_eq!(code(&["sample", "--dataset", "d.json", "--quotas", "1,2,3", "--seed", "1"]), 2);
    assert_eq!(code(&["sample", "--dataset", "missing.json", "--k", "6", "--seed", "1"]), 3);
    std::fs::write(dir.path().join("bad.csv"), "a,g\nfoo,x\n").unwrap();
    assert_eq!(
        code(&["ingest", "--input", "bad.csv", "--label-column", "g", "--seed", "1", "--output", "o.json"]),
        3
    );

    // two identical rows per part: the second draw within a part has no mass
    std::fs::write(dir.path().join("deg.csv"), "x,y,g\n1,0,a\n1,0,a\n0,1,b\n0,2,b\n").unwrap();
    assert_eq!(
        code(&["ingest", "--input", "deg.csv", "--label-column", "g", "--seed", "1", "--output", "deg.json"]),
        0
    );
    assert_eq!(code(&["sample", "--dataset", "deg.json", "--quotas", "2,0", "--seed", "1"]), 4);
}
