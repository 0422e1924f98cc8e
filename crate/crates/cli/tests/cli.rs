use std::path::Path;
use std::process::{Command, Output};

use billiard_core::billiard::brute_force_exit;

fn billiard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_billiard"))
        .args(args)
        .env_remove("BILLIARD_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV: everything after the `#` header and the column line.
fn rows(text: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# {"));
    lines.next().unwrap();
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn header(text: &str) -> serde_json::Value {
    let first = text.lines().next().unwrap();
    serde_json::from_str(first.trim_start_matches("# ")).unwrap()
}

#[test]
fn farey_order_five() {
    let out = billiard(&["farey", "--Q", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "a,q,abar,qprime,qsecond,case");
    let r = rows(&text);
    assert_eq!(r.len(), 11);
    assert_eq!(r[0][5], "boundary");
    assert_eq!(r[3], ["1", "3", "1", "4", "5", "I1"]);
    assert_eq!(header(&text)["config"]["Q"], 5);
    assert_eq!(header(&text)["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn sector_partition_check() {
    let out = billiard(&["sectors", "--Q", "100", "--check-partition"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let summary: serde_json::Value = serde_json::from_str(text.lines().nth(1).unwrap()).unwrap();
    assert!(summary["defect"].as_f64().unwrap() < 1e-10);
    assert_eq!(summary["passed"], true);
}

#[test]
fn sector_table_columns() {
    let out = billiard(&["sectors", "--Q", "2"]);
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "q,a,case,lo_num,lo_den,hi_num,hi_den,width_exact,width_asym");
    let r = rows(&text);
    assert_eq!(r.len(), 3);
    assert_eq!(r[1][..7], ["2", "1", "I4", "1", "2", "1", "2"]);
}

#[test]
fn limits_table() {
    let out = billiard(&["limits", "--tmax", "1.5", "--tstep", "0.01"]);
    assert!(out.status.success());
    let r = rows(&stdout(&out));
    assert_eq!(r.len(), 151);
    let last = r.last().unwrap();
    assert_eq!(last[0], "1.5");
    assert_eq!(last[1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(r[0][1], "1");
}

#[test]
fn cdf_grid_has_321_rows() {
    let out = billiard(&[
        "cdf", "--epsilon", "1e-3", "--quantity", "tau", "--tmax", "1.6", "--tstep", "0.005", "--samples", "20000",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "t,empirical,limit,abs_err");
    let r = rows(&text);
    assert_eq!(r.len(), 321);
    assert_eq!(r[113][0], "0.565");
}

#[test]
fn simulate_rows_and_oracle_spot_check() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exits.csv");
    let out = billiard(&[
        "simulate", "--epsilon", "1e-3", "--samples", "1000", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().nth(1).unwrap(), "omega,tan_omega,epsilon,tau,eps_tau,R,eps_R,q,a,hit_x,hit_y");
    let r = rows(&text);
    assert_eq!(r.len(), 1000);
    let omega: f64 = r[0][0].parse().unwrap();
    assert!((omega - std::f64::consts::FRAC_PI_4 / 2000.0).abs() < 1e-15);
    let oracle = brute_force_exit(omega, 1e-3, 1002).unwrap();
    assert_eq!(r[0][5], oracle.reflections.to_string());
    assert_eq!(r[0][7], oracle.target.denominator().to_string());
}

#[test]
fn invalid_radius_is_a_usage_error() {
    let out = billiard(&["simulate", "--epsilon", "0.6"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon"));
    assert_eq!(billiard(&["simulate", "--epsilon", "x"]).status.code(), Some(1));
    assert_eq!(billiard(&["nonsense"]).status.code(), Some(1));
    assert_eq!(billiard(&["--help"]).status.code(), Some(0));
}

#[test]
fn sweep_of_collision_counts() {
    let out = billiard(&["sweep", "--epsilons", "1e-2,1e-3,1e-4", "--quantity", "R"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let entries = doc["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    let d: Vec<f64> = entries.iter().map(|e| e["sup_distance"].as_f64().unwrap()).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    for e in entries {
        assert_eq!(e["n_samples"], 1_000_000);
        assert!(e["seconds"].as_f64().unwrap() >= 0.0);
    }
}

#[test]
fn first_moment() {
    let out = billiard(&["moments", "--r", "1", "--epsilon", "1e-3"]);
    assert!(out.status.success());
    let r = rows(&stdout(&out));
    let value: f64 = r[0][3].parse().unwrap();
    assert!((value - 0.421_383).abs() < 0.01, "{value}");
}

#[test]
fn output_is_independent_of_worker_count() {
    let args = ["cdf", "--epsilon", "1e-2", "--quantity", "R", "--samples", "30000"];
    let one = billiard(&[&args[..], &["--workers", "1"]].concat());
    let three = billiard(&[&args[..], &["--workers", "3"]].concat());
    assert!(one.status.success() && three.status.success());
    assert_eq!(one.stdout, three.stdout);
    let again = billiard(&[&args[..], &["--workers", "1"]].concat());
    assert_eq!(one.stdout, again.stdout);
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"epsilon": 0.05, "samples": 10, "seed": 3}"#);
    let out = billiard(&["simulate", "--config", &cfg, "--samples", "4"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let h = header(&text);
    assert_eq!(h["config"]["epsilon"], 0.05);
    assert_eq!(h["config"]["samples"], 4);
    assert_eq!(h["config"]["seed"], 3);
    assert_eq!(rows(&text).len(), 4);

    let bad = write_config(dir.path(), r#"{"epsilonn": 0.05}"#);
    assert_eq!(billiard(&["simulate", "--config", &bad]).status.code(), Some(1));
}

#[test]
fn trajectory_export() {
    let out = billiard(&["traj", "--tan-omega", "0.5", "--epsilon", "0.1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().nth(1).unwrap(), "seg_index,x0,y0,x1,y1");
    let r = rows(&text);
    assert_eq!(r.len(), 2);
    let x1: f64 = r[0][3].parse().unwrap();
    let y1: f64 = r[0][4].parse().unwrap();
    assert!((x1 - 1.0).abs() < 1e-12 && (y1 - 0.5).abs() < 1e-12);
    let end: (f64, f64) = (r[1][3].parse().unwrap(), r[1][4].parse().unwrap());
    assert!((end.0 - 0.089_442_719_099_991_6).abs() < 1e-9);
    assert!((end.1 - 0.955_278_640_450_004_2).abs() < 1e-9);

    let both = billiard(&["traj", "--tan-omega", "0.5", "--omega", "0.3"]);
    assert_eq!(both.status.code(), Some(1));
    assert_eq!(billiard(&["traj", "--epsilon", "0.1"]).status.code(), Some(1));
}

#[test]
fn invariant_suite() {
    let out = billiard(&["check"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().skip(1).all(|l| l.starts_with("PASS")));
}
