use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pdd_core::numerics::{RealMatrix, RealVector};
use pdd_core::pdd::pdd_run_with_observer;
use pdd_core::pdd::toy::QuadraticToy;
use pdd_core::{PddConfig, CSV_HEADER};
use serde_json::Value;
use tempfile::TempDir;

fn pdd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdd")).args(args).output().expect("pdd binary runs")
}

fn pdd_ok(args: &[&str]) -> Output {
    let out = pdd(args);
    assert!(out.status.success(), "pdd {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn csv_rows(p: &Path) -> Vec<BTreeMap<String, String>> {
    let mut rdr = csv::Reader::from_path(p).unwrap();
    let headers = rdr.headers().unwrap().clone();
    rdr.records().map(|r| headers.iter().zip(r.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()).collect()
}

#[test]
fn gen_is_byte_deterministic_per_seed() {
    let dir = TempDir::new().unwrap();
    for (app, dims, ext) in [("multicast", "8,4,2", "json"), ("relay", "4,4,4", "json"), ("volmin", "10,3,50", "vmin"), ("volmin", "6,3,20", "csv")] {
        let a = dir.path().join(format!("{app}_a.{ext}"));
        let b = dir.path().join(format!("{app}_b.{ext}"));
        let c = dir.path().join(format!("{app}_c.{ext}"));
        pdd_ok(&["gen", "--app", app, "--dims", dims, "--seed", "5", "--out", s(&a)]);
        pdd_ok(&["gen", "--app", app, "--dims", dims, "--seed", "5", "--out", s(&b)]);
        pdd_ok(&["gen", "--app", app, "--dims", dims, "--seed", "6", "--out", s(&c)]);
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{app}");
        assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap(), "{app}");
        if app == "volmin" {
            let ta = fs::read(dir.path().join(format!("{app}_a.{ext}.truth.json"))).unwrap();
            let tb = fs::read(dir.path().join(format!("{app}_b.{ext}.truth.json"))).unwrap();
            assert_eq!(ta, tb);
        }
    }
}

#[test]
fn gen_follows_the_data_protocols() {
    let dir = TempDir::new().unwrap();
    let m = dir.path().join("m.json");
    pdd_ok(&["gen", "--app", "multicast", "--dims", "8,4,2", "--power-db", "10", "--out", s(&m)]);
    let m = read_json(&m);
    assert_eq!(m["N_t"], 8);
    assert_eq!(m["channels"].as_array().unwrap().len(), 8);
    assert_eq!(m["groups"].as_array().unwrap().iter().map(|g| g.as_array().unwrap().len()).sum::<usize>(), 8);
    assert!(m["sigma2"].as_array().unwrap().iter().all(|v| v.as_f64() == Some(1.0)));
    assert!((m["P_BS"].as_f64().unwrap() - 10.0).abs() < 1e-12);

    let r = dir.path().join("r.json");
    pdd_ok(&["gen", "--app", "relay", "--dims", "4,4,4", "--power-db", "10", "--out", s(&r)]);
    let r = read_json(&r);
    assert!((r["P_S"].as_f64().unwrap() - 10.0).abs() < 1e-12);
    assert!((r["P_R"].as_f64().unwrap() - 10.0).abs() < 1e-12);
}

#[test]
fn solve_writes_trace_and_result_consistently() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("m.json");
    let out = dir.path().join("out");
    pdd_ok(&["gen", "--app", "multicast", "--dims", "4,2,1", "--seed", "2", "--out", s(&inst)]);
    let status = pdd(&["solve", "--app", "multicast", "--instance", s(&inst), "--out", s(&out)]).status;
    let result = read_json(&out.join("result.json"));
    let converged = result["result"]["converged"].as_bool().unwrap();
    assert_eq!(status.code(), Some(if converged { 0 } else { 3 }));

    let text = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let rows = csv_rows(&out.join("trace.csv"));
    assert_eq!(rows.len() as u64, result["result"]["iterations"].as_u64().unwrap());
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["k"], (i + 1).to_string());
    }
    if converged {
        let last: f64 = rows.last().unwrap()["h_inf"].parse().unwrap();
        assert!(last <= 1e-4);
    }
}

#[test]
fn exit_code_reports_termination_before_max_outer() {
    let dir = TempDir::new().unwrap();
    let ok = dir.path().join("ok");
    let capped = dir.path().join("capped");
    let run = |out: &Path, extra: &[&str]| {
        let mut args = vec!["solve", "--app", "multicast", "--dims", "4,1,1", "--seed", "1", "--out", s(out)];
        args.extend_from_slice(extra);
        pdd(&args)
    };
    let a = run(&ok, &[]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(read_json(&ok.join("result.json"))["result"]["converged"], true);

    let b = run(&capped, &["--max-outer", "1"]);
    assert_eq!(b.status.code(), Some(3));
    let result = read_json(&capped.join("result.json"));
    assert_eq!(result["result"]["converged"], false);
    assert_eq!(result["result"]["iterations"], 1);
}

#[test]
fn errors_and_usage_have_distinct_exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.json");
    let out = pdd(&["solve", "--app", "relay", "--instance", s(&missing), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));

    let out = pdd(&["solve", "--app", "relay", "--dims", "4,4", "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));

    assert_eq!(pdd(&["solve", "--app", "nope", "--out", "x"]).status.code(), Some(2));
    assert_eq!(pdd(&["solve", "--app", "relay", "--dims", "2,2,2", "--c", "1.5", "--out", s(dir.path())]).status.code(), Some(1));
}

#[test]
fn flags_override_config_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"rho0": 3.5, "c": 0.4, "max_outer": 7}"#).unwrap();
    let out = dir.path().join("out");
    pdd(&["solve", "--app", "relay", "--dims", "2,2,2", "--config", s(&cfg), "--c", "0.7", "--seed", "4", "--out", s(&out)]);
    let used = &read_json(&out.join("result.json"))["config"];
    assert_eq!(used["rho0"], 3.5);
    assert_eq!(used["c"], 0.7);
    assert_eq!(used["max_outer"], 7);
    assert_eq!(used["seed"], 4);

    fs::write(&cfg, r#"{"rhoo": 1.0}"#).unwrap();
    let bad = pdd(&["solve", "--app", "relay", "--dims", "2,2,2", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("rhoo"));
}

#[test]
fn volmin_solve_writes_restart_traces_and_mse() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("a.vmin");
    let out = dir.path().join("out");
    pdd_ok(&["gen", "--app", "volmin", "--dims", "6,3,60", "--seed", "3", "--out", s(&data)]);
    let truth = dir.path().join("a.vmin.truth.json");
    let status = pdd(&["solve", "--app", "volmin", "--instance", s(&data), "--truth", s(&truth), "--restarts", "2", "--out", s(&out)]).status;
    assert!(matches!(status.code(), Some(0 | 3)));
    let result = &read_json(&out.join("result.json"))["result"];
    assert!(result["mse_db"].as_f64().is_some());
    assert_eq!(result["restarts_used"], 2);
    assert_eq!(result["X"].as_array().unwrap().len(), 6);
    for r in 0..2 {
        assert!(!csv_rows(&out.join(format!("trace_restart{r}.csv"))).is_empty());
    }
    assert_eq!(csv_rows(&out.join("trace.csv")).len() as u64, result["iterations"].as_u64().unwrap());
}

/// Between consecutive dual-update steps `η` has shrunk to at most `τ` times
/// the earlier violation, so each dual-branch `‖h‖∞` is at most `τ` times the
/// previous one.
#[test]
fn toy_trace_h_inf_decreases_along_dual_branch() {
    let n = 4;
    let toy = QuadraticToy::new(
        RealMatrix::identity(n, n),
        RealVector::from_element(n, 1.0),
        RealMatrix::from_row_slice(2, n, &[1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 0.0, 0.0]),
        RealVector::from_vec(vec![1.0, 0.5]),
        vec![vec![0, 1], vec![2], vec![3]],
    )
    .unwrap();
    let cfg = PddConfig { rho0: 1.0, max_outer: 60, outer_tol: 1e-9, ..PddConfig::default() };
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("trace.csv");
    let mut text = format!("{CSV_HEADER}\n");
    pdd_run_with_observer(&toy, RealVector::zeros(n), RealVector::zeros(2), &cfg, |r| {
        text.push_str(&r.csv_row());
        text.push('\n');
    })
    .unwrap();
    fs::write(&path, text).unwrap();

    let dual: Vec<f64> = csv_rows(&path).iter().filter(|r| r["branch"] == "dual-update").map(|r| r["h_inf"].parse().unwrap()).collect();
    assert!(dual.len() >= 3, "only {} dual steps", dual.len());
    for w in dual.windows(2) {
        assert!(w[1] <= cfg.tau * w[0] * (1.0 + 1e-12), "{} then {}", w[0], w[1]);
    }
}

fn bench_rows(dir: &Path, name: &str, seeds: &str) -> (Vec<BTreeMap<String, String>>, Vec<BTreeMap<String, String>>) {
    let out = dir.join(name);
    pdd_ok(&["bench", "--app", "multicast", "--dims", "4,2,1", "--seeds", seeds, "--jobs", "3", "--out", s(&out)]);
    csv_rows(&out).into_iter().partition(|r| r["status"] != "aggregate")
}

#[test]
fn bench_rows_aggregates_and_order_independence() {
    let dir = TempDir::new().unwrap();
    let (rows, aggs) = bench_rows(dir.path(), "fwd.csv", "1..10");
    assert_eq!(rows.len(), 10);
    assert_eq!(rows.iter().map(|r| r["seed"].parse::<u64>().unwrap()).collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());
    let names: Vec<&str> = aggs.iter().map(|r| r["seed"].as_str()).collect();
    assert_eq!(names, ["mean", "median", "p10", "p90", "min", "max"]);
    assert!(rows.iter().all(|r| r["status"] == "ok"));

    for col in ["objective", "feasibility_gap", "iterations", "kkt_residual"] {
        let mut v: Vec<f64> = rows.iter().map(|r| r[col].parse().unwrap()).collect();
        v.sort_by(f64::total_cmp);
        let median = 0.5 * (v[4] + v[5]);
        let mean = v.iter().sum::<f64>() / 10.0;
        let got = |stat: &str| -> f64 { aggs.iter().find(|r| r["seed"] == stat).unwrap()[col].parse().unwrap() };
        assert!((got("median") - median).abs() <= 1e-12 * median.abs().max(1e-300), "{col} median");
        assert!((got("mean") - mean).abs() <= 1e-12 * mean.abs().max(1e-300), "{col} mean");
        assert_eq!(got("min"), v[0]);
        assert_eq!(got("max"), v[9]);
    }

    let (rev, _) = bench_rows(dir.path(), "rev.csv", "10,9,8,7,6,5,4,3,2,1");
    let strip = |r: &BTreeMap<String, String>| {
        let mut r = r.clone();
        r.remove("wall_ms");
        r
    };
    let by_seed: BTreeMap<String, _> = rev.iter().map(|r| (r["seed"].clone(), strip(r))).collect();
    for r in &rows {
        assert_eq!(strip(r), by_seed[&r["seed"]]);
    }
}

#[test]
fn verify_numerics_passes() {
    let out = pdd(&["verify", "numerics"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("PASS numerics.")));
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_all_lists_every_suite_once() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("report.json");
    let out = pdd(&["verify", "all", "--json", s(&json)]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    for suite in ["numerics", "pdd-core", "multicast", "relay", "volmin"] {
        let n = text.lines().filter(|l| l.starts_with(&format!("suite {suite}:"))).count();
        assert_eq!(n, 1, "suite {suite} listed {n} times");
    }
    assert_eq!(text.lines().filter(|l| l.starts_with("suite ")).count(), 5);
    assert_eq!(read_json(&json)["passed"], true);
}

#[test]
fn verify_rejects_unknown_suite() {
    assert_ne!(pdd(&["verify", "bogus"]).status.code(), Some(0));
}
