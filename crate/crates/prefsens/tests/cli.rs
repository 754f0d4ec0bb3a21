use std::path::Path;
use std::process::Command;

use prefsens::cli;
use prefsens::dataset_io::{read_dataset, read_manifest, MANIFEST_NAME};
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("prefsens").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn json(args: &[&str]) -> Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let r = run(&full);
    assert_eq!(r.code, 0, "{args:?} failed: {}", r.stderr);
    serde_json::from_str(r.stdout.trim()).unwrap()
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing from {v}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compose_prints_six_significant_digits() {
    let r = run(&["compose", "--p-ik", "0.9801", "--p-kj", "0.02"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "p_ij = 0.501279\n");
}

#[test]
fn compose_json_and_probit_link() {
    let logistic = num(&json(&["compose", "--p-ik", "0.9", "--p-kj", "0.3"]), "p_ij");
    let probit = num(&json(&["compose", "--p-ik", "0.9", "--p-kj", "0.3", "--link", "probit"]), "p_ij");
    // Logistic: 0.9*0.3 / (0.9*0.3 + 0.1*0.7).
    assert!((logistic - 0.27 / 0.34).abs() < 1e-12);
    assert!(probit > 0.5 && (probit - logistic).abs() > 1e-3);
}

#[test]
fn gradients_for_both_models() {
    let bt = json(&["grad", "bt", "--p-ik", "0.99", "--p-kj", "0.02"]);
    assert!((num(&bt, "d_p_ik") - 22.3703).abs() < 1e-3);

    let pl = json(&["grad", "pl", "--p-uv", "0.3", "--p-vu", "0.4", "--alpha", "1.5", "--beta", "0.5"]);
    let d = 1.5 * 0.3 + 0.4;
    assert!((num(&pl, "d_p_uv") - 0.5 * 0.4 / (d * d)).abs() < 1e-12);
    assert!((num(&pl, "d_p_vu") + 0.5 * 0.3 / (d * d)).abs() < 1e-12);

    let from_scores = json(&["grad", "pl", "--p-uv", "0.3", "--p-vu", "0.4", "--scores", "1,0,-1", "--u", "1", "--v", "2"]);
    assert!(num(&from_scores, "alpha") >= 1.0);
    let beta = num(&from_scores, "beta");
    assert!(beta > 0.0 && beta <= 1.0);
}

#[test]
fn regions() {
    let bt = json(&["region", "bt", "--M", "20", "--p-kj", "0.02"]);
    assert!((num(&bt, "gamma0") - 0.988224).abs() < 1e-6);
    let iv = bt["interval"].as_array().unwrap();
    assert!(iv[0].as_f64().unwrap() < 0.99 && 0.99 < iv[1].as_f64().unwrap());

    let empty = json(&["region", "bt", "--M", "20", "--p-kj", "0.5"]);
    assert_eq!(empty["case"], "empty");
    assert!(empty["interval"].is_null());

    let pl = run(&["region", "pl", "--M", "2", "--alpha", "1.01", "--beta", "0.99", "--p-uv", "0.01"]);
    assert_eq!(pl.code, 0, "{}", pl.stderr);
    assert!(pl.stdout.contains("gamma1") && pl.stdout.contains("p_vu in ("));
    let none = run(&["region", "pl", "--M", "2", "--alpha", "1.01", "--beta", "0.99", "--p-vu", "0.5"]);
    assert!(none.stdout.starts_with("empty"));
}

#[test]
fn areas_report_closed_form_and_oracle() {
    let bt = json(&["area", "bt", "--M", "2", "--samples", "200000", "--seed", "3"]);
    assert!((num(&bt, "closed_form") - 0.073919).abs() < 1e-6);
    assert!(num(&bt, "relative_discrepancy") < 0.05);
    assert_eq!(bt["seed"], 3);

    let pl = json(&["area", "pl", "--M", "2", "--alpha", "1.5", "--beta", "0.5", "--grid", "20000"]);
    assert!((num(&pl, "closed_form") - 0.25 / (6.0 * 1.5 * 4.0)).abs() < 1e-15);
    assert!(num(&pl, "absolute_discrepancy") < 1e-6);
}

#[test]
fn witness_exceeds_threshold() {
    for link in ["logistic", "probit"] {
        let w = json(&["witness", "--link", link, "--M", "10"]);
        assert!(num(&w, "derivative") > 10.0);
    }
}

#[test]
fn raster_exports() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bt.csv");
    let r = run(&["raster", "bt", "--format", "csv", "--resolution", "64", "--out", s(&csv)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 64 * 64);

    let svg = dir.path().join("pl.svg");
    let r = run(&["raster", "pl", "--which", "vu", "--resolution", "64", "--thresholds", "1.01,2", "--out", s(&svg)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") || text.starts_with("<?xml"));
    assert!(text.contains("class-1") && text.contains("class-2"));
}

#[test]
fn dataset_generation_sweep_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let args = ["gen-data", "--permutation", "dog,bird,cat", "--p12", "0.9", "--p23", "0.2", "--n", "4000", "--seed", "7"];
    let r = run(&[&args[..], &["--out", s(&data)]].concat());
    assert_eq!(r.code, 0, "{}", r.stderr);
    let samples = read_dataset(&data).unwrap();
    assert_eq!(samples.len(), 4000);

    let again = dir.path().join("again.jsonl");
    run(&[&args[..], &["--out", s(&again)]].concat());
    assert_eq!(std::fs::read(&data).unwrap(), std::fs::read(&again).unwrap());

    let fit_out = dir.path().join("fit.json");
    let r = run(&["fit", "--in", s(&data), "--options", "dog,bird,cat", "--out", s(&fit_out)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("P(dog > bird)"));
    let fit: Value = serde_json::from_str(&std::fs::read_to_string(&fit_out).unwrap()).unwrap();
    let p = &fit["predicted"];
    assert!((p[0][1].as_f64().unwrap() - 0.9).abs() < 0.03);
    assert!((p[1][2].as_f64().unwrap() - 0.2).abs() < 0.03);

    let sweep_dir = dir.path().join("sweep");
    let r = run(&["sweep-data", "--n", "200", "--out", s(&sweep_dir)]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let manifest = read_manifest(&sweep_dir.join(MANIFEST_NAME)).unwrap();
    assert_eq!(manifest.len(), 21);
    for entry in &manifest {
        assert_eq!(entry.p12, 0.99);
        assert_eq!(read_dataset(&sweep_dir.join(&entry.path)).unwrap().len(), 200);
    }
}

#[test]
fn fit_from_count_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("counts.txt");
    std::fs::write(&m, "2\n0 25\n75 0\n").unwrap();
    let v = json(&["fit", "--in", s(&m)]);
    let scores = v["scores"].as_array().unwrap();
    let gap = scores[1].as_f64().unwrap() - scores[0].as_f64().unwrap();
    assert!((gap - 3f64.ln()).abs() < 1e-6);
    assert_eq!(v["options"][0], "0");
    assert_eq!(v["diverged"], false);

    let one_sided = dir.path().join("one_sided.txt");
    std::fs::write(&one_sided, "2\n0 10\n0 0\n").unwrap();
    let v = json(&["fit", "--in", s(&one_sided), "--options", "a,b"]);
    assert_eq!(v["diverged"], true);

    let mismatch = run(&["fit", "--in", s(&m), "--options", "a,b,c"]);
    assert_eq!(mismatch.code, 1);
}

#[test]
fn invalid_input_exits_with_one() {
    let r = run(&["compose", "--p-ik", "1.5", "--p-kj", "0.2"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("p-ik"));

    assert_eq!(run(&["region", "bt", "--M", "0.5", "--p-kj", "0.2"]).code, 1);
    assert_eq!(run(&["gen-data", "--p12", "0", "--p23", "0.5", "--out", "x.jsonl"]).code, 1);
    assert_eq!(run(&["fit", "--in", "/nonexistent/counts.txt"]).code, 1);
    assert_eq!(run(&["no-such-command"]).code, 1);
    assert_eq!(run(&["grad", "pl", "--p-uv", "0.3", "--p-vu", "0.3"]).code, 1);
}

#[test]
fn help_and_version_exit_with_zero() {
    let h = run(&["--help"]);
    assert_eq!(h.code, 0);
    assert!(h.stdout.contains("sweep-data"));
    assert_eq!(run(&["--version"]).code, 0);
}

#[test]
fn quick_verify_passes() {
    let r = run(&["verify", "--quick"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.stdout.lines().filter(|l| l.starts_with("PASS")).count(), 10);
    assert_eq!(r.stdout.lines().filter(|l| l.starts_with("SKIP")).count(), 3);
}

#[test]
fn binary_propagates_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_prefsens");
    let ok = Command::new(bin).args(["compose", "--p-ik", "0.9", "--p-kj", "0.1"]).output().unwrap();
    assert!(ok.status.success());
    assert_eq!(String::from_utf8_lossy(&ok.stdout), "p_ij = 0.5\n");
    let bad = Command::new(bin).args(["compose", "--p-ik", "0", "--p-kj", "0.1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
