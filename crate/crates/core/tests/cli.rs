//! The `isinggap` binary: exit-code contract, artifacts and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isinggap"))
        .args(args)
        .env_remove("ISINGGAP_MAX_STATES")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn spectrum_reports_extreme_eigenvalues() {
    let out = run(&["spectrum", "--n", "2", "--T", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    for key in ["beta1", "beta_min", "beta_star"] {
        assert!(v[key].is_f64(), "{key}");
    }
}

#[test]
fn spectrum_infinite_temperature_multiplicities() {
    let v = json(&run(&["spectrum", "--n", "2", "--T", "inf"]));
    assert_eq!(v["T"], "inf");
    let mult: Vec<u64> = v["multiplicities"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["multiplicity"].as_u64().unwrap())
        .collect();
    assert_eq!(mult, [1, 4, 6, 4, 1]);
}

#[test]
fn oversized_lattice_exits_with_ceiling_code() {
    let out = run(&["spectrum", "--n", "9", "--T", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["error"], "lattice-too-large");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["compare", "--grid", ""]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--T", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["spectrum", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn bounds_small_lattice_passes() {
    let out = run(&["bounds", "--n", "2", "--T", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .all(|x| x["pass"] == true));
    assert_eq!(v["flags"]["printed_partition_bound_violated"], true);
}

#[test]
fn bounds_n3_reports_the_interior_violation() {
    let out = run(&["bounds", "--n", "3", "--T", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let failed: Vec<&str> = v["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|x| x["pass"] == false)
        .map(|x| x["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed.len(), 1);
    assert!(failed[0].contains("interior"));
}

#[test]
fn bounds_formulas_only_for_large_lattices() {
    let out = run(&["bounds", "--n", "50", "--T", "1", "--formulas-only"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out).get("exact").is_none());
}

#[test]
fn compare_writes_csv_with_f_above_g() {
    let out = run(&[
        "compare",
        "--grid",
        "0.5:10:0.5",
        "--sizes",
        "5,10,20",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("T,f,g,closed_form_gap_n5"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[1] >= r[2]));
}

#[test]
fn verify_suites_pass() {
    for args in [
        &["verify", "--n", "2", "--T", "1", "--horizon", "50"][..],
        &["verify", "--n", "3", "--T", "2", "--horizon", "30"][..],
        &["verify", "--n", "1", "--T", "1"][..],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(0), "{args:?}");
    }
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn verify_artifacts_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| {
        vec![
            "verify".to_string(),
            "--n".into(),
            "3".into(),
            "--T".into(),
            "1".into(),
            "--horizon".into(),
            "20".into(),
            "--seed".into(),
            "7".into(),
            "--out".into(),
            d.to_str().unwrap().into(),
        ]
    };
    let run_in = |d: &Path| {
        let a = args(d);
        run(&a.iter().map(String::as_str).collect::<Vec<_>>())
    };
    let (ra, rb) = (run_in(a.path()), run_in(b.path()));
    assert_eq!(ra.stdout, rb.stdout);
    let (fa, fb) = (read_dir_sorted(a.path()), read_dir_sorted(b.path()));
    let names: Vec<&str> = fa.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["tv_decay.csv", "verify.json", "verify.txt"]);
    assert_eq!(fa, fb);
}

#[test]
fn environment_ceiling_override() {
    let out = Command::new(env!("CARGO_BIN_EXE_isinggap"))
        .args(["spectrum", "--n", "3", "--T", "1"])
        .env("ISINGGAP_MAX_STATES", "256")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn dump_writes_kernel_and_loads() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "dump",
        "--n",
        "2",
        "--T",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["states"], 16);
    let csv = std::fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 16 * 5);
    assert!(dir.path().join("edge_loads.csv").exists());
}
