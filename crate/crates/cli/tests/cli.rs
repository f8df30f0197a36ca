use std::process::{Command, Output};

use serde_json::Value;

fn mtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mtlab"))
        .args(args)
        .env_remove("MTLAB_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn error_kind(o: &Output) -> String {
    let err = String::from_utf8(o.stderr.clone()).unwrap();
    let first = err.lines().next().unwrap();
    let v: Value = serde_json::from_str(first).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn constants_table() {
    let o = mtlab(&["constants", "--n-max", "5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# mtlab-schema v1\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0].last().unwrap(), "false");
    assert!(rows[1..].iter().all(|r| r.last().unwrap() == "true"));
}

#[test]
fn constants_extended_precision() {
    let o = Command::new(env!("CARGO_BIN_EXE_mtlab"))
        .args(["constants", "--n-max", "1"])
        .env("MTLAB_PRECISION", "extended")
        .output()
        .unwrap();
    let rows = csv_rows(&stdout(&o));
    // 1/(8 pi) to 50 significant digits
    assert_eq!(rows[0][1], "3.9788735772973833942220940843128590508614911435114e-2");
}

#[test]
fn mfe_solve_matches_library() {
    let o = mtlab(&["mfe", "solve", "--n", "2", "--a", "4", "--format", "json"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let eps = v["results"]["eps_fit"].as_f64().unwrap();
    assert!((eps - 0.5f64.sqrt()).abs() < 1e-6);
    let lib = mtlab_core::solve(2, 4.0, &mtlab_core::SolveOptions::default()).unwrap();
    assert_eq!(eps, lib.eps_fit);
}

#[test]
fn sweep_scaled_family_is_flat() {
    let o = mtlab(&["sweep", "--family", "fs-scaled", "--n", "2", "--gamma", "3", "--eps", "1,0.1,0.01"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    let g: Vec<f64> = rows.iter().map(|r| r[8].parse().unwrap()).collect();
    assert!((g[1] - g[2]).abs() < 0.05, "{g:?}");
}

#[test]
fn output_is_deterministic() {
    let args = ["mt", "--family", "fs", "--n", "2", "--eps", "0.5,1", "--gamma", "1,2", "--format", "json"];
    assert_eq!(mtlab(&args).stdout, mtlab(&args).stdout);
}

#[test]
fn family_round_trips_through_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.txt");
    let p = path.to_str().unwrap();
    assert!(mtlab(&["family", "--n", "2", "--eps", "0.5", "--out", p]).status.success());
    let from_file = stdout(&mtlab(&["bm", "--input", p]));
    let direct = stdout(&mtlab(&["bm", "--n", "2", "--eps", "0.5"]));
    let (a, b) = (&csv_rows(&from_file)[0], &csv_rows(&direct)[0]);
    let mass = |r: &Vec<String>| r[3].parse::<f64>().unwrap();
    assert!((mass(a) / mass(b) - 1.0).abs() < 1e-6);
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "n = 3\n[bm]\nfamily = cone\nslope = 0.5\n").unwrap();
    let c = cfg.to_str().unwrap();
    let rows = csv_rows(&stdout(&mtlab(&["bm", "--config", c])));
    assert_eq!(rows[0][2], "3");
    assert_eq!(rows[0][0], "cone");
    let rows = csv_rows(&stdout(&mtlab(&["bm", "--config", c, "--n", "1"])));
    assert_eq!(rows[0][2], "1");

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let o = mtlab(&["bm", "--config", c]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_kind(&o), "validation");
}

#[test]
fn exit_codes() {
    let o = mtlab(&["mt", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "usage");

    let o = mtlab(&["mfe", "solve", "--n", "2", "--a", "27"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_kind(&o), "validation");

    let o = mtlab(&["laplace", "--family", "cone", "--slope", "1", "--gamma", "3"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_kind(&o), "numerical");
}

#[test]
fn reproduce_subset() {
    let o = mtlab(&["reproduce", "--only", "1,4,10", "--format", "csv"]);
    assert!(o.status.success());
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[2] == "PASS"));
}
