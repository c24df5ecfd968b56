use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn marketlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_marketlab")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()).collect()
}

const SMALL_SIM: &str = r#"{
    "schema_version": 1,
    "preset": "calibration",
    "sim": {"n_listings": 300},
    "analysis": {"reps": 10, "bootstrap": {"b": 200}}
}"#;

#[test]
fn steady_reports_calibration_gte() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("steady.json");
    let o = marketlab(&["steady", "--preset", "calibration", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let v = read_json(&out);
    assert!((v["gte"].as_f64().unwrap() - 0.031070).abs() < 1e-5);
    assert!((v["global_control"]["booking_probability"].as_f64().unwrap() - 0.2011).abs() < 1e-4);
    assert!(v.get("supply_limit").is_none());
}

#[test]
fn malformed_config_exits_two_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", r#"{"schema_version": 1, "markt": {}}"#);
    let out = dir.path().join("out.json");
    let o = marketlab(&["steady", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());
    let o = marketlab(&["simulate", "--preset", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let cfg = write(dir.path(), "neg.json", r#"{"schema_version": 1, "market": {
        "customers": [{"id": "c", "phi": 1.0, "v": {"l": -0.3}}],
        "listings": [{"id": "l", "rho": 1.0}], "lambda": 1.0}}"#);
    assert_eq!(marketlab(&["steady", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn supply_constrained_steady_includes_limit_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "supply.json", r#"{"schema_version": 1, "market": {
        "customers": [{"id": "c", "phi": 1.0, "v": {"l": 0.315}}],
        "listings": [{"id": "l", "rho": 1.0}], "lambda": 10000.0},
        "intervention": {"type": "lift", "factor": 1.25}}"#);
    let out = dir.path().join("s.json");
    let o = marketlab(&["steady", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&out);
    assert!(v["supply_limit"]["max_relative_error"].as_f64().unwrap() < 1e-2);
}

#[test]
fn simulate_is_reproducible_and_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.json", SMALL_SIM);
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = marketlab(&[
            "simulate", "--config", &cfg, "--reps", "10", "--seed", "7", "--threads", threads, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let a = run("a.csv", "8");
    assert_eq!(a, run("b.csv", "8"));
    assert_eq!(a, run("c.csv", "1"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("scenario,point,estimator,source,mean,bias,se,rmse,ci_lo,ci_hi,gte_true,reps,seed\n"));
    assert_eq!(csv_rows(&text).len(), 10);
}

#[test]
fn simulated_cr_bias_agrees_with_mean_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sim.json",
        r#"{"schema_version": 1, "preset": "calibration", "sim": {"n_listings": 1000},
            "analysis": {"reps": 100, "estimators": ["CR"]}}"#,
    );
    let o = marketlab(&["simulate", "--config", &cfg, "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&String::from_utf8(o.stdout).unwrap());
    let sim = rows.iter().find(|r| &r[3] == "sim").unwrap();
    let mf = rows.iter().find(|r| &r[3] == "meanfield").unwrap();
    let f = |r: &csv::StringRecord, i: usize| r[i].parse::<f64>().unwrap();
    assert!(f(sim, 5).is_finite());
    assert!(f(sim, 8) <= f(mf, 4) && f(mf, 4) <= f(sim, 9), "{sim:?} vs {mf:?}");
}

#[test]
fn simulate_writes_event_log() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim.json", SMALL_SIM);
    let events = dir.path().join("events.csv");
    let o = marketlab(&["simulate", "--config", &cfg, "--events", events.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    let text = fs::read_to_string(events).unwrap();
    assert!(text.starts_with("time,customer_condition,listing_condition,listing_type\n"));
    assert!(text.lines().count() > 100);
}

#[test]
fn asymptotics_reports_demand_limit_gte() {
    let o = marketlab(&["asymptotics", "--preset", "calibration"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["demand_limit"]["gte_over_scale"].as_f64().unwrap() - 0.042941).abs() < 1e-6);
    assert!((v["supply_limit"]["estimators"]["CR"]["estimate_over_scale"].as_f64().unwrap() - 0.2221).abs() < 1e-4);
    assert!((v["two_listing"]["eta"].as_f64().unwrap() - 0.54113).abs() < 1e-5);
}

#[test]
fn balance_sweep_emits_rows_for_both_sources() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"schema_version": 1,
            "sim": {"n_listings": 100, "t0": 1.0, "t1": 3.0},
            "analysis": {"reps": 3, "bootstrap": {"b": 100}},
            "sweep": {"scenario": {"type": "vary_balance", "preset": "calibration", "balances": [0.1, 1.0, 10.0]}}}"#,
    );
    let o = marketlab(&["sweep", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&String::from_utf8(o.stdout).unwrap());
    assert_eq!(rows.len(), 3 * 5 * 2);
}

#[test]
fn failing_sweep_point_exits_four_with_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.json",
        r#"{"schema_version": 1,
            "sweep": {"scenario": {"type": "vary_balance", "preset": "calibration", "balances": [1.0, -1.0]}, "simulate": false}}"#,
    );
    let out = dir.path().join("rows.csv");
    let o = marketlab(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(csv_rows(&fs::read_to_string(out).unwrap()).len(), 5);
}

#[test]
fn cluster_compare_separable_market_is_unbiased() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"schema_version": 1, "analysis": {"cluster_ratios": [0.0, 0.5, 1.0]}}"#);
    let o = marketlab(&["cluster-compare", "--config", &cfg, "--mean-field-only", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    let bias = |point: &str, est: &str| {
        rows.iter()
            .find(|r| r["point"] == point && r["estimator"] == est)
            .unwrap()["bias"]
            .as_f64()
            .unwrap()
    };
    assert!(bias("y/x=0", "Cluster").abs() < 1e-8);
    assert!((bias("y/x=1", "Cluster") - bias("y/x=1", "LR")).abs() < 1e-10);
    assert!(v["cluster_bias_monotone"].is_boolean());
}
