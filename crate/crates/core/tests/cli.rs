use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bfk_lab::cli::{main_with_args, samples_from_csv, RunConfig};

fn bfk(args: &[&str], cache_dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfk"))
        .args(args)
        .env("BFK_CACHE_DIR", cache_dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_interval_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let report = tmp.path().join("out/report.json");
    let csv = tmp.path().join("summary.csv");
    let o = bfk(
        &["verify", "interval", "--m", "2", "--L", "1", "-o", report.to_str().unwrap(), "--csv", csv.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
    assert!((v["lhs"].as_f64().unwrap() - 4.0).abs() < 1e-5);
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 2);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let empty_cache = tmp.path().join("cache");
    // 1: an assertion fails (verifying an empty cache)
    let o = bfk(&["cache", "verify", "--dir", empty_cache.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    // 2: invalid configuration
    assert_eq!(bfk(&["verify", "interval", "--m", "-1"], tmp.path()).status.code(), Some(2));
    assert_eq!(bfk(&["no-such-command"], tmp.path()).status.code(), Some(2));
    // 3: numerical failure (an ill-conditioned fit)
    let scan = tmp.path().join("scan.csv");
    let o = bfk(&["dtn-scan", "interval", "--abs-min", "1e2", "--abs-max", "1e6", "--points", "200", "-o", scan.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let o = bfk(&["fit", "--input", scan.to_str().unwrap(), "--j-max", "30"], tmp.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn fit_rejects_empty_input() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let o = bfk(&["fit", "--input", empty.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
}

#[test]
fn scan_then_fit_gives_unit_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let scan = tmp.path().join("scan.csv");
    let o = bfk(&["dtn-scan", "interval", "--m", "1", "--L", "1", "-o", scan.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let samples = samples_from_csv(&fs::read_to_string(&scan).unwrap()).unwrap();
    assert!(samples.len() >= 24);
    let fit_out = tmp.path().join("fit.json");
    let o = bfk(&["fit", "--input", scan.to_str().unwrap(), "-o", fit_out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&fit_out).unwrap()).unwrap();
    assert!(v["pi"]["0"].as_f64().unwrap().abs() < 1e-6);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"command": "zeta", "geometry": "interval", "m": 3.0, "L": 2.0, "bc": "dirichlet"}"#).unwrap();
    let parsed = RunConfig::from_json_file(&cfg).unwrap();
    assert_eq!((parsed.m, parsed.length), (3.0, 2.0));

    let out = tmp.path().join("zeta.json");
    let cfg_s = cfg.to_str().unwrap();
    let o = bfk(&["--config", cfg_s, "zeta", "interval", "--m", "1", "-o", out.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    // m = 1 from the flag, L = 2 from the file: det = 2 sinh(2)
    let det = v["determinant"].as_f64().unwrap();
    assert!((det - 2.0 * 2f64.sinh()).abs() < 1e-6 * det, "{det}");

    fs::write(&cfg, r#"{"command": "zeta", "mass": 3.0}"#).unwrap();
    assert_eq!(bfk(&["--config", cfg_s, "zeta"], tmp.path()).status.code(), Some(2));
}

#[test]
fn cache_lifecycle() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("zeros");
    let d = dir.to_str().unwrap();
    assert_eq!(bfk(&["cache", "build", "--dir", d, "--x-max", "60"], tmp.path()).status.code(), Some(0));
    let o = bfk(&["cache", "verify", "--dir", d, "--fraction", "0.2"], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // a disk verification reads the same cache
    let o = bfk(&["verify", "disk", "--R", "1", "--m", "1", "--use-cache", "--cache-dir", d], tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let file = fs::read_dir(&dir).unwrap().next().unwrap().unwrap().path();
    let text = fs::read_to_string(&file).unwrap();
    fs::write(&file, text.replacen("\"format_version\":1", "\"format_version\":99", 1).replacen("\"format_version\": 1", "\"format_version\": 99", 1)).unwrap();
    let o = bfk(&["cache", "verify", "--dir", d], tmp.path());
    assert_eq!(o.status.code(), Some(2));

    assert_eq!(bfk(&["cache", "clear", "--dir", d], tmp.path()).status.code(), Some(0));
    assert!(!dir.exists() || fs::read_dir(&dir).unwrap().next().is_none());
}

#[test]
fn lab_output_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a.json"), tmp.path().join("b.json"));
    for p in [&a, &b] {
        let o = bfk(&["lab", "--seed", "7", "--n", "60", "-o", p.to_str().unwrap()], tmp.path());
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn in_process_entry_point() {
    assert_eq!(main_with_args(["bfk", "lab", "--n", "20", "--seed", "3"]), 0);
    assert_eq!(main_with_args(["bfk", "lab", "--n", "2"]), 2);
}
