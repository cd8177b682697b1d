use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(rel: &str) -> String {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus"))
        .join(rel)
        .to_string_lossy()
        .into_owned()
}

fn bquant(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bquant")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn exit_code_matrix() {
    let sphere = corpus("valid/b_sphere.json");
    let interval = corpus("valid/interval_0_3.json");
    let cases: Vec<(Vec<String>, i32)> = vec![
        (vec!["check".into(), sphere.clone()], 0),
        (vec!["check".into(), corpus("negative/non_primitive_weight.json")], 1),
        (vec!["check".into(), corpus("malformed/truncated.json")], 2),
        (vec!["check".into(), corpus("malformed/float_bound.json")], 2),
        (vec!["check".into(), corpus("malformed/wrong_leaf_rank.json")], 2),
        (vec!["check".into(), corpus("valid/no_such_file.json")], 2),
        (vec!["quantize".into(), sphere.clone()], 0),
        (vec!["quantize".into(), interval.clone(), "--format".into(), "json".into()], 0),
        (vec!["quantize".into(), corpus("negative/zero_modular_weight.json")], 1),
        (vec!["quantize".into(), corpus("negative/equal_signs.json")], 1),
        (vec!["quantize".into(), sphere.clone(), "--format".into(), "xml".into()], 2),
        (vec!["reduce".into(), sphere.clone(), "--weight".into(), "1".into()], 0),
        (vec!["reduce".into(), sphere.clone(), "--weight".into(), "1,2".into()], 2),
        (vec!["reduce".into(), sphere.clone(), "--weight".into(), "x".into()], 2),
        (vec!["verify-qr".into(), interval.clone(), corpus("valid/interval_neg2_0.json")], 0),
        (vec!["verify-qr".into(), interval.clone(), corpus("valid/square_1.json")], 2),
        (vec!["verify-qr".into(), interval.clone(), sphere.clone()], 2),
        (vec!["cancel".into(), sphere.clone(), "--hypersurface".into(), "0".into()], 0),
        (vec!["cancel".into(), sphere.clone(), "--hypersurface".into(), "3".into()], 2),
        (vec!["cancel".into(), corpus("negative/equal_signs.json"), "--hypersurface".into(), "0".into()], 1),
        (vec!["frobnicate".into()], 2),
        (vec![], 2),
    ];
    for (args, code) in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = bquant(&refs);
        assert_eq!(o.status.code(), Some(code), "{args:?}\nstdout: {}\nstderr: {}", stdout(&o), stderr(&o));
    }
}

#[test]
fn check_prints_one_line_per_check() {
    let o = bquant(&["check", &corpus("valid/b_sphere.json")]);
    let out = stdout(&o);
    assert!(out.lines().count() >= 6);
    assert!(out.lines().all(|l| l.ends_with(" PASS")));
    let o = bquant(&["check", &corpus("negative/non_primitive_weight.json")]);
    assert!(stdout(&o).contains("mu-integrality FAIL v=(2)"));
}

#[test]
fn quantize_tables() {
    let o = bquant(&["quantize", &corpus("valid/b_sphere.json")]);
    let out = stdout(&o);
    assert!(out.starts_with("weight | multiplicity\n(0) | 1\n(1) | 1\n(2) | 1\ndim = 3"), "{out}");
    let o = bquant(&["quantize", &corpus("valid/interval_0_3.json")]);
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.ends_with(" | 1")).count(), 4);
    assert!(out.contains("dim = 4"));
    let o = bquant(&["quantize", &corpus("negative/zero_modular_weight.json")]);
    assert!(stderr(&o).contains("dichotomy"));
}

#[test]
fn quantize_verify_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    let o = bquant(&[
        "quantize",
        &corpus("valid/strip_leaf_3.json"),
        "--verify",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verified: pointwise agreement"));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["dimension"], 12);
}

#[test]
fn reduce_examples() {
    let sphere = corpus("valid/b_sphere.json");
    let o = bquant(&["reduce", &sphere, "--weight", "1"]);
    assert!(stdout(&o).contains("count = 1 (P0:+1, P1:0)"));
    let o = bquant(&["reduce", &sphere, "--weight", "-4"]);
    assert!(stdout(&o).contains("count = 0 (P0:+1, P1:-1)"));
}

#[test]
fn verify_qr_examples() {
    let o = bquant(&["verify-qr", &corpus("valid/b_sphere.json"), &corpus("valid/point.json")]);
    let out = stdout(&o);
    assert!(out.contains("= 1\n") && out.contains("VERIFIED"), "{out}");

    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache.json");
    std::fs::write(&cache, r#"{"rank":1,"multiplicities":[{"weight":[0],"mult":1},{"weight":[-1],"mult":5}]}"#).unwrap();
    let o = bquant(&[
        "verify-qr",
        &corpus("valid/b_sphere.json"),
        &corpus("valid/interval_neg2_0.json"),
        "--character",
        cache.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("MISMATCH at weight (1)"));
}

#[test]
fn cancel_examples() {
    for f in ["valid/b_sphere.json", "valid/strip_leaf_1.json"] {
        let o = bquant(&["cancel", &corpus(f), "--hypersurface", "0"]);
        assert!(stdout(&o).contains("local quantization = 0"), "{f}");
        assert!(stdout(&o).contains("monodromy = identity"));
    }
}
