use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn designlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_designlab")).args(args).env_remove("DESIGNLAB_THREADS").output().unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = designlab(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn header(csv: &str) -> &str {
    csv.lines().next().unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let idx = header(csv).split(',').position(|c| c == name).unwrap();
    rows(csv).iter().map(|r| r[idx].parse().unwrap()).collect()
}

#[test]
fn plot_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    run_ok(&["coll-mc", "--n", "3", "--s", "5", "--trials", "200", "--seed", "1", "--out", d]);
    run_ok(&["spectral-mix", "--n", "10", "--t", "40", "--out", d]);
    run_ok(&["anticonc", "--n", "3", "--s", "4", "--trials", "200", "--seed", "1", "--out", d]);
    run_ok(&["gap-2d", "--out", d]);
    let expect = [
        ("coll_vs_depth", "s,mean,stderr"),
        ("mixing_curve", "t,box_norm"),
        ("spectrum", "m,lambda,x0"),
        ("anticonc", "s,theta,fraction,stderr,pz_bound"),
        ("gap_table", "d,m,t,method,cos_angle,gap_value,q_inf,c_dnt,bound"),
    ];
    for (name, cols) in expect {
        let csv = read(&dir.path().join(format!("{name}.csv")));
        assert_eq!(header(&csv), cols, "{name}");
    }
}

#[test]
fn row_counts_match_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    run_ok(&["coll-mc", "--n", "3", "--s", "10", "--trials", "100", "--seed", "2", "--out", d]);
    assert_eq!(rows(&read(&dir.path().join("coll_vs_depth.csv"))).len(), 11);
    run_ok(&["spectral-mix", "--n", "12", "--t", "30", "--out", d]);
    assert_eq!(rows(&read(&dir.path().join("mixing_curve.csv"))).len(), 31);
    assert_eq!(rows(&read(&dir.path().join("spectrum.csv"))).len(), 12);
    run_ok(&["hitting", "--n", "40", "--out", d]);
    assert_eq!(rows(&read(&dir.path().join("hitting.csv"))).len(), 40);
    run_ok(&["coll-chain", "--n", "3", "--t", "25", "--out", d]);
    assert_eq!(rows(&read(&dir.path().join("coll_chain.csv"))).len(), 26);
    run_ok(&["waittime", "--n", "8", "--z", "2", "--tau", "3", "--trials", "500", "--seed", "2", "--out", d]);
    assert_eq!(rows(&read(&dir.path().join("waittime.csv"))).len(), 9);
    let side: Value = serde_json::from_str(&read(&dir.path().join("waittime.json"))).unwrap();
    assert_eq!(side["tables"][0]["rows"], 9);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let d = dir.path().to_str().unwrap();
        run_ok(&["coll-mc", "--n", "4", "--s", "12", "--trials", "300", "--seed", "9", "--out", d]);
        run_ok(&["scramble", "--n", "4", "--s", "20", "--trials", "200", "--seed", "9", "--out", d]);
        run_ok(&["waittime", "--trials", "1000", "--seed", "9", "--out", d]);
    }
    for f in ["coll_vs_depth.csv", "coll_vs_depth.json", "scramble.csv", "scramble.json", "waittime.csv", "waittime.json"] {
        assert_eq!(read(&a.path().join(f)), read(&b.path().join(f)), "{f}");
    }
}

#[test]
fn thread_count_does_not_change_output() {
    let one = run_ok(&["coll-mc", "--n", "3", "--s", "6", "--trials", "400", "--seed", "5", "--threads", "1"]);
    let env = Command::new(env!("CARGO_BIN_EXE_designlab"))
        .args(["coll-mc", "--n", "3", "--s", "6", "--trials", "400", "--seed", "5"])
        .env("DESIGNLAB_THREADS", "3")
        .output()
        .unwrap();
    assert!(env.status.success());
    assert_eq!(one.stdout, env.stdout);
}

#[test]
fn seed_is_printed_even_when_generated() {
    let out = run_ok(&["coll-mc", "--n", "2", "--s", "1", "--trials", "100"]);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.lines().any(|l| l.starts_with("seed: ") && l[6..].parse::<u64>().is_ok()), "{err}");
}

#[test]
fn haar_collision_at_depth_sixty() {
    let out = run_ok(&["coll-mc", "--n", "4", "--ensemble", "cg", "--s", "60", "--trials", "100000", "--seed", "7"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let mean = *column(&csv, "mean").last().unwrap();
    let se = *column(&csv, "stderr").last().unwrap();
    assert!((mean - 2.0 / 17.0).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn mixing_curve_meets_limit() {
    let out = run_ok(&["spectral-mix", "--n", "25"]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let t = (3.0 * 25.0 * 25f64.ln()).ceil() as usize;
    let v = column(&csv, "box_norm")[t];
    assert!(v <= 28.0 / 2f64.powi(25));
}

#[test]
fn gap_methods_agree_in_json() {
    let out = run_ok(&["gap-2d", "--d", "2", "--m", "2", "--t", "2", "--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let g = v["results"]["gram"]["cos_angle"].as_f64().unwrap();
    let b = v["results"]["brute"]["cos_angle"].as_f64().unwrap();
    assert!((g - b).abs() < 1e-10);
    assert_eq!(v["experiment"], "gap-2d");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# chain run\nn = 5\nt = 7\n").unwrap();
    let c = cfg.to_str().unwrap();
    let out = run_ok(&["coll-chain", "--config", c, "--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["n"], 5);
    assert_eq!(v["tables"][0]["rows"], 8);
    let out = run_ok(&["coll-chain", "--config", c, "--n", "3", "--format", "json"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["n"], 3);
    assert_eq!(v["config"]["t"], 7);
}

#[test]
fn errors_have_messages_and_codes() {
    let out = designlab(&["frobnicate"]);
    assert!(!out.status.success());
    let out = designlab(&["coll-chain", "--n", "9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("9"));
    let out = designlab(&["coll-mc", "--ensemble", "ring"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ring"));
    let out = designlab(&["coll-mc", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let out = designlab(&["coll-chain", "--out", blocker.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("i/o error"));
}

#[test]
fn verify_fast_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["verify", "--level", "fast", "--out", dir.path().to_str().unwrap()]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["name"] == "p_stationarity"));
    assert!(checks.iter().all(|c| c["status"] == "pass" && c["anchor"].as_str().is_some_and(|a| !a.is_empty())));
    assert!(dir.path().join("verify.json").exists());
}

#[test]
fn other_ensembles_run() {
    for (ens, n, extra) in [("1d", "4", None), ("2d", "4", Some("1")), ("haar", "3", None)] {
        let mut args = vec!["coll-mc", "--ensemble", ens, "--n", n, "--s", "2", "--trials", "100", "--seed", "4"];
        if let Some(c) = extra {
            args.extend(["--c", c]);
        }
        let out = run_ok(&args);
        let csv = String::from_utf8(out.stdout).unwrap();
        assert_eq!(header(&csv), "s,mean,stderr");
        for v in column(&csv, "mean") {
            assert!(v > 0.0 && v <= 1.0 + 1e-12);
        }
    }
    assert!(!designlab(&["coll-mc", "--ensemble", "2d", "--n", "5"]).status.success());
}
