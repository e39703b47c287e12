use levymap::{exponent_of, map_exponent, Family, IntegralMapSpec};
use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn levymap(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levymap")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn variance_of(result: &Value) -> f64 {
    result["result"]["triple"]["covariance"][0][0].as_f64().unwrap()
}

#[test]
fn transform_gaussian_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let out = levymap(dir.path(), &["transform", "--dist", "gaussian", "--map", r#"{"map":"jbeta","beta":1}"#, "--out", "j.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!((variance_of(&json(&dir.path().join("j.json"))) - 1.0 / 3.0).abs() < 1e-15);
    let out = levymap(dir.path(), &["transform", "--dist", "gaussian", "--map", r#"{"map":"i"}"#, "--out", "i.json"]);
    assert_eq!(out.status.code(), Some(0));
    let i = json(&dir.path().join("i.json"));
    assert_eq!(variance_of(&i), 0.5);
    assert_eq!(i["method"], "closed_form");
    let m = json(&dir.path().join("i.json.manifest.json"));
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn transform_gamma_table_matches_quadrature() {
    let dir = tempfile::tempdir().unwrap();
    let dist = r#"{"family":"gamma","shape":1,"rate":1}"#;
    let out = levymap(dir.path(), &["transform", "--dist", dist, "--map", r#"{"map":"jbeta","beta":2}"#, "--out", "g.json"]);
    assert_eq!(out.status.code(), Some(0));
    let quad = map_exponent(
        &IntegralMapSpec::jbeta(2.0).unwrap(),
        &exponent_of(&Family::gamma(1.0, 1.0).triple().unwrap()).unwrap(),
    )
    .unwrap();
    let table = std::fs::read_to_string(dir.path().join("g.csv")).unwrap();
    let mut rows = 0;
    for line in table.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let q = quad.eval(&[f[0]]).unwrap();
        assert!((q.re - f[1]).abs() < 1e-6 && (q.im - f[2]).abs() < 1e-6, "y = {}", f[0]);
        rows += 1;
    }
    assert_eq!(rows, 64);
}

#[test]
fn transform_by_quadrature_for_general_maps() {
    let dir = tempfile::tempdir().unwrap();
    let map = r#"{"map":"integral","kernel":{"type":"power","alpha":1},"time_change":{"type":"identity"},"interval":[0,1]}"#;
    let out = levymap(dir.path(), &["transform", "--dist", "gaussian", "--map", map, "--out", "q.json"]);
    assert_eq!(out.status.code(), Some(0));
    let q = json(&dir.path().join("q.json"));
    assert_eq!(q["method"], "quadrature");
    assert!(q["result"].is_null());
}

#[test]
fn classify_decisions_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = levymap(dir.path(), &["classify", "--dist", "gaussian", "--beta", "1", "--out", "a.json"]);
    assert_eq!(out.status.code(), Some(0));
    let a = json(&dir.path().join("a.json"));
    assert_eq!(a["decision"], "yes");
    assert!((a["witness"]["triple"]["covariance"][0][0].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);

    let out = levymap(dir.path(), &["classify", "--dist", "gamma", "--beta", "1", "--out", "b.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&dir.path().join("b.json"))["margins"]["factorization_gap"].as_f64().unwrap() < 1e-5);

    let atom = r#"{"family":"compound_poisson","rate":1,"atoms":[{"x":1,"prob":1}]}"#;
    let out = levymap(dir.path(), &["classify", "--dist", atom, "--beta", "1", "--out", "c.json"]);
    assert_eq!(out.status.code(), Some(1));
    let c = json(&dir.path().join("c.json"));
    assert_eq!(c["decision"], "no");
    assert!(c["failure_evidence"]["mass"].as_f64().unwrap() < -1e-8);
}

#[test]
fn classify_with_supplied_witness() {
    let dir = tempfile::tempdir().unwrap();
    let good = r#"{"family":"gaussian","mean":0,"variance":0.6666666666666666}"#;
    let out = levymap(dir.path(), &["classify", "--dist", "gaussian", "--beta", "1", "--witness", good, "--out", "w.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&dir.path().join("w.json"))["supplied_witness"]["factorization"]["pass"], true);
    let bad = r#"{"family":"gaussian","mean":0,"variance":1}"#;
    let out = levymap(dir.path(), &["classify", "--dist", "gaussian", "--beta", "1", "--witness", bad, "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_and_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = levymap(dir.path(), &["simulate", "--dist", "gaussian", "--n", "0", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("s.csv").exists());
    let out = levymap(dir.path(), &["transform", "--dist", "{oops", "--map", r#"{"map":"i"}"#, "--out", "t.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed JSON"));
    let out = levymap(dir.path(), &["transform", "--dist", r#"{"family":"cauchy"}"#, "--map", r#"{"map":"i"}"#, "--out", "t.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cauchy"));
}

#[test]
fn maflp_samples_verify_against_law() {
    let dir = tempfile::tempdir().unwrap();
    let out = levymap(
        dir.path(),
        &["maflp", "--alpha", "0.25", "--t", "1", "--dist", "gaussian", "--n", "100000", "--seed", "21", "--parts", "--out", "z.csv"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("z.v.csv").exists() && dir.path().join("z.u.csv").exists());
    let target = r#"{"law":"maflp_z","dist":"gaussian","alpha":0.25,"t":1}"#;
    let out = levymap(dir.path(), &["verify", "--samples", "z.csv", "--target", target, "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&dir.path().join("r.json"));
    assert_eq!(r["pass"], true);
    assert_eq!(r["n_samples"], 100000);
    // wrong law fails
    let out = levymap(dir.path(), &["verify", "--samples", "z.csv", "--target", "gaussian", "--out", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_self_consistency() {
    let dir = tempfile::tempdir().unwrap();
    let dist = r#"{"family":"compound_poisson","rate":1.5,"atoms":[{"x":2,"prob":0.5},{"x":-0.5,"prob":0.5}]}"#;
    let out = levymap(dir.path(), &["simulate", "--dist", dist, "--n", "20000", "--seed", "2", "--out", "s.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let out = levymap(dir.path(), &["verify", "--samples", "s.csv", "--target", dist, "--out", "r.json"]);
    assert_eq!(out.status.code(), Some(0));
    let spec = r#"{"map":"jbeta","beta":1}"#;
    let out = levymap(dir.path(), &["simulate", "--dist", "gamma", "--spec", spec, "--n", "20000", "--out", "j.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let target = r#"{"law":"mapped","dist":"gamma","map":{"map":"jbeta","beta":1}}"#;
    let out = levymap(dir.path(), &["verify", "--samples", "j.csv", "--target", target, "--out", "rj.json"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn replay_and_thread_count_reproduce_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--dist", "gamma", "--spec", r#"{"map":"i"}"#, "--n", "3000", "--seed", "5", "--out", "a.csv"];
    let out = levymap(dir.path(), &args);
    assert_eq!(out.status.code(), Some(0));
    let first = std::fs::read(dir.path().join("a.csv")).unwrap();
    let out = levymap(dir.path(), &["replay", "a.csv.manifest.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read(dir.path().join("a.csv")).unwrap(), first);
    let out = Command::new(env!("CARGO_BIN_EXE_levymap"))
        .current_dir(dir.path())
        .env("LEVYMAP_THREADS", "3")
        .args(args)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("a.csv")).unwrap(), first);
    // replay regenerates a damaged output
    std::fs::write(dir.path().join("a.csv"), b"x0\n1\n").unwrap();
    let m: Value = json(&dir.path().join("a.csv.manifest.json"));
    assert_eq!(m["seed"], 5);
    let out = levymap(dir.path(), &["replay", "a.csv.manifest.json"]);
    assert_eq!(out.status.code(), Some(0));
}
