use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_toral");

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("TORAL_OUT_DIR")
        .output()
        .unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn linear_entropy_command() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["linear-entropy", "--map", "paper-t4"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!((v["entropy"].as_f64().unwrap() - 2.3897).abs() < 1e-3);
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 4);
    let v = stdout_json(&run(tmp.path(), &["linear-entropy", "--map", "cat"]));
    assert!((v["entropy"].as_f64().unwrap() - 0.9624).abs() < 1e-4);
}

#[test]
fn usage_and_config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let id = write_config(
        tmp.path(),
        "id.json",
        r#"{"kind":"linear","matrix":[[1,0],[0,1]]}"#,
    );
    let o = run(tmp.path(), &["linear-entropy", "--config", &id]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["exit_code"], 2);
    assert!(e["error"].as_str().unwrap().contains("hyperbolic"));

    let bad = write_config(
        tmp.path(),
        "bad.json",
        r#"{"kind":"linear","matrix":[[2,0],[0,1]]}"#,
    );
    assert_eq!(
        run(tmp.path(), &["linear-entropy", "--config", &bad])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(tmp.path(), &["linear-entropy", "--map", "nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(tmp.path(), &["linear-entropy"]).status.code(), Some(2));
    assert_eq!(run(tmp.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(
            tmp.path(),
            &["estimate", "--map", "cat", "--eps", "0.1,0.2"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        run(
            tmp.path(),
            &["estimate", "--map", "cat", "--region", "chart-plane"]
        )
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        Command::new(BIN)
            .arg("--help")
            .output()
            .unwrap()
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn numerical_failure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        tmp.path(),
        &[
            "semiconj",
            "--map",
            "mane-t2-default",
            "--grid",
            "16",
            "--max-iter",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["exit_code"], 3);
}

#[test]
fn estimate_writes_table_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let id = write_config(
        tmp.path(),
        "id.json",
        r#"{"kind":"linear","matrix":[[1,0],[0,1]]}"#,
    );
    // entropy estimation does not need hyperbolicity
    let o = run(
        tmp.path(),
        &[
            "estimate",
            "--config",
            &id,
            "--samples",
            "3000",
            "--n-max",
            "8",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout_json(&o)["value"].as_f64().unwrap() < 0.05);
    let csv = std::fs::read_to_string(tmp.path().join("estimate.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "n,eps,separated,spanning,sample"
    );
    assert_eq!(csv.lines().count(), 1 + 8 * 4);
    let j: Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("estimate.json")).unwrap())
            .unwrap();
    assert_eq!(j["schema_version"], 1);
}

#[test]
fn cat_estimate_default_band() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        tmp.path(),
        &["estimate", "--map", "cat", "--samples", "30000"],
    );
    let v = stdout_json(&o)["value"].as_f64().unwrap();
    assert!((0.72..=1.06).contains(&v), "{v}");
}

#[test]
fn semiconj_and_fiber_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        tmp.path(),
        &["semiconj", "--map", "mane-t2-default", "--grid", "64"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert!(v["residual"].as_f64().unwrap() < 1e-6);
    assert!(v["sup_norm"].as_f64().unwrap() > 0.0);
    for f in ["semiconj.bin", "semiconj.json", "semiconj_history.csv"] {
        assert!(tmp.path().join(f).exists(), "{f}");
    }

    let o = run(
        tmp.path(),
        &[
            "fiber",
            "--map",
            "mane-t2-default",
            "--grid",
            "128",
            "--tol",
            "1e-6",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let v = stdout_json(&o);
    assert!(v["fiber_rate"].as_f64().unwrap() < 0.1, "{v}");
    let bound = std::fs::read_to_string(tmp.path().join("fiber_bound.csv")).unwrap();
    assert_eq!(
        bound.lines().next().unwrap(),
        "n,eps,log_count,log_bound,holds"
    );
    assert!(bound.lines().skip(1).all(|l| l.ends_with("true")));
}

#[test]
fn certify_and_cones_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["certify", "--map", "t4-example-default"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["markov_verified"], true);
    assert!(v["certified_lower_bound"].as_f64().unwrap() > 2.3897 + 0.5);
    // a refused certificate is a result, not an error
    let o = run(
        tmp.path(),
        &["certify", "--map", "t4-example-default", "--t", "1"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout_json(&o)["markov_verified"], false);
    let o = run(tmp.path(), &["certify", "--map", "paper-t4"]);
    assert_eq!(stdout_json(&o)["markov_verified"], false);

    let o = run(
        tmp.path(),
        &["cones", "--map", "t4-example-default", "--samples", "1000"],
    );
    let v = stdout_json(&o);
    assert_eq!(v["passed"], true);
    assert!(v["mu_min"].as_f64().unwrap() > 3.0);
    let hist = std::fs::read_to_string(tmp.path().join("cones_histogram.csv")).unwrap();
    assert_eq!(hist.lines().next().unwrap(), "lo,hi,count");
}

#[test]
fn scan_and_output_directory_from_env() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("from-env");
    let o = Command::new(BIN)
        .args([
            "scan-transitivity",
            "--map",
            "cat",
            "--iterations",
            "100000",
            "--bits",
            "4",
        ])
        .env("TORAL_OUT_DIR", &out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("coverage.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("100000,256,"), "{last}");
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "estimate",
        "--map",
        "mane-t2-default",
        "--samples",
        "3000",
        "--n-max",
        "6",
        "--seed",
        "7",
    ];
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&a, &args);
    run(&b, &args);
    assert_eq!(
        std::fs::read(a.join("estimate.csv")).unwrap(),
        std::fs::read(b.join("estimate.csv")).unwrap()
    );
    let c = tmp.path().join("c");
    run(
        &c,
        &[
            "estimate",
            "--map",
            "mane-t2-default",
            "--samples",
            "3000",
            "--n-max",
            "6",
            "--seed",
            "8",
        ],
    );
    assert_ne!(
        std::fs::read(a.join("estimate.csv")).unwrap(),
        std::fs::read(c.join("estimate.csv")).unwrap()
    );
}

#[test]
fn quick_repro_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["repro", "--quick"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let csv = std::fs::read_to_string(tmp.path().join("repro.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "criterion,name,passed,value,target"
    );
    assert!(csv.lines().skip(1).all(|l| l.contains(",true,")));
}
