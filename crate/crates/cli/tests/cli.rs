use std::fs;
use std::path::Path;

use discspec::catalog::CATALOG;
use discspec::execute;
use discspec::output::{read_results, Manifest};

fn run(args: &[&str]) -> discspec::Execution {
    let mut argv = vec!["discspec"];
    argv.extend_from_slice(args);
    execute(argv)
}

#[test]
fn every_catalog_entry_analyzes() {
    for e in CATALOG {
        let x = run(&["analyze", e.name]);
        assert_eq!(x.code, 0, "{}: {}", e.name, x.stderr);
        assert!(x.stdout.contains("S0"), "{}", x.stdout);
    }
    let x = run(&["catalog"]);
    assert_eq!(x.code, 0);
    assert_eq!(x.stdout.lines().count(), CATALOG.len());
}

#[test]
fn exit_codes() {
    let x = run(&["analyze", "no-such-family"]);
    assert_eq!(x.code, 2);
    assert!(x.stderr.contains("unknown family"));
    let x = run(&["survey", "trinomial-5", "--prime", "11", "--budget", "1"]);
    assert_eq!(x.code, 3, "{}", x.stderr);
    assert!(x.stdout.contains("no witness within budget 1"));
    // A prime in S0 is a precondition failure.
    let x = run(&["survey", "trinomial-5", "--prime", "5"]);
    assert_eq!(x.code, 2);
    let x = run(&["target", "c2-cubic", "--residue", "nonsense"]);
    assert_eq!(x.code, 2);
    assert_eq!(run(&["--help"]).code, 0);
}

#[test]
fn bad_config_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "name = \"bad\"\nterms = [[2, 0, 1], [0, 0, \"x1\"]]\n").unwrap();
    let x = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(x.code, 2);
    assert!(!x.stderr.is_empty());
}

fn artifacts(dir: &Path) -> (Vec<u8>, Manifest) {
    let payload = fs::read(dir.join("results.jsonl")).unwrap();
    let manifest: Manifest = serde_json::from_slice(&fs::read(dir.join("manifest.json")).unwrap()).unwrap();
    assert!(dir.join("summary.txt").exists());
    (payload, manifest)
}

#[test]
fn artifacts_verify_and_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "target".to_string(),
            "trinomial-3".into(),
            "--residue".into(),
            "13:2".into(),
            "--records".into(),
            "3".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            d.to_string_lossy().into_owned(),
        ]
    };
    let mut argv_a = vec!["discspec".to_string()];
    argv_a.extend(args(a.path()));
    argv_a.extend(["--threads".to_string(), "1".into()]);
    let x = execute(argv_a);
    assert_eq!(x.code, 0, "{}", x.stderr);
    let mut argv_b = vec!["discspec".to_string()];
    argv_b.extend(args(b.path()));
    argv_b.extend(["--threads".to_string(), "3".into()]);
    assert_eq!(execute(argv_b).code, 0);

    let (pa, ma) = artifacts(a.path());
    let (pb, mb) = artifacts(b.path());
    assert_eq!(pa, pb, "results differ across runs or thread counts");
    assert_eq!(ma.results_hash, mb.results_hash);
    assert_eq!(ma.records, 3);
    assert_eq!(ma.seed, 7);
    assert_eq!(ma.family.as_deref(), Some("trinomial-3"));
    assert!(ma.config_hash.is_some());

    let results = a.path().join("results.jsonl");
    let lines = read_results(&results).unwrap();
    assert_eq!(lines.len(), 3);
    let x = run(&["verify", results.to_str().unwrap()]);
    assert_eq!(x.code, 0, "{}{}", x.stdout, x.stderr);
    assert!(x.stdout.contains("3 of 3 records verified"));

    // A tampered δ must be caught.
    let text = fs::read_to_string(&results).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    let d: num_bigint::BigInt = v["delta"].as_str().unwrap().parse().unwrap();
    v["delta"] = serde_json::Value::String((d * num_bigint::BigInt::from(3)).to_string());
    let bad = a.path().join("bad.jsonl");
    fs::write(&bad, format!("{v}\n")).unwrap();
    let x = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(x.code, 2);
    assert!(x.stdout.contains("FAILED"));
}

#[test]
fn verify_flag_and_twist() {
    let x = run(&["--verify", "twist", "--poly", "T^3-T", "--prime", "13", "--residue", "5"]);
    assert_eq!(x.code, 0, "{}{}", x.stdout, x.stderr);
    assert!(x.stdout.contains("1 of 1 records verified"), "{}", x.stdout);
    let x = run(&["twist", "--poly", "T^2", "--prime", "13", "--residue", "5"]);
    assert_eq!(x.code, 2);
}

#[test]
fn nonreduced_squares_for_a5() {
    let x = run(&["nonreduced-survey", "an-5", "--modulus", "7", "--records", "30"]);
    assert_eq!(x.code, 0, "{}{}", x.stdout, x.stderr);
    assert!(x.stdout.contains("all observed classes in the subgroup: true"), "{}", x.stdout);
}
