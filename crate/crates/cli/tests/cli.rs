//! End-to-end checks of the binary: exit codes, file output, determinism.

use std::path::PathBuf;
use std::process::Command;

const INSTANCE_B: &str = r#"{
  "schema_version": "1",
  "params": {
    "f1": {"kind": "monod", "max_rate": 2.0, "half_saturation": 1.4},
    "f2": {"kind": "monod", "max_rate": 2.0, "half_saturation": 0.6},
    "y1": 2.0, "y2": 0.7, "death_rate": 0.5, "drain_fraction": 0.4,
    "s1_bar": 0.7, "s2_bar": 0.6, "s1_in": 1.0, "s2_in": 1.0
  },
  "initial": {"s1": 0.6, "s2": 0.7, "x": 0.01},
  "run": {"max_impulses": 20}
}"#;

const INSTANCE_WASHOUT: &str = r#"{
  "schema_version": "1",
  "params": {
    "f1": {"kind": "monod", "max_rate": 2.0, "half_saturation": 1.4},
    "f2": {"kind": "monod", "max_rate": 2.0, "half_saturation": 1.2},
    "y1": 2.0, "y2": 0.7, "death_rate": 0.5, "drain_fraction": 0.4,
    "s1_bar": 0.7, "s2_bar": 0.6, "s1_in": 1.0, "s2_in": 1.0
  },
  "initial": {"s1": 0.1, "s2": 0.7, "x": 0.3}
}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scf-lab"))
}

fn write_instance(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scf-lab-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn analyze_succeeds_on_feasible_instance() {
    let path = write_instance("b.json", INSTANCE_B);
    let out = bin()
        .args(["analyze", "--instance"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"critical_drain\""));
    assert!(text.contains("\"cycle_growth\""));
}

#[test]
fn missing_instance_file_exits_2() {
    let out = bin()
        .args(["analyze", "--instance", "/nonexistent/nowhere.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_instance_exits_2_with_location() {
    let path = write_instance("bad.json", "{\"schema_version\": \"1\"}");
    let out = bin()
        .args(["analyze", "--instance"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "no location in: {err}");
}

#[test]
fn orbit_on_washout_instance_exits_4() {
    let path = write_instance("washout.json", INSTANCE_WASHOUT);
    let out = bin()
        .args(["orbit", "--instance"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no periodic orbit"), "{err}");
}

#[test]
fn sweep_to_file_is_deterministic() {
    let path = write_instance("b-sweep.json", INSTANCE_B);
    let out1 = path.with_extension("csv1");
    let out2 = path.with_extension("csv2");
    for out in [&out1, &out2] {
        let status = bin()
            .args(["sweep", "--r-grid", "16", "--instance"])
            .arg(&path)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out1).unwrap();
    let b = std::fs::read(&out2).unwrap();
    assert_eq!(a, b, "sweep runs differ");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 17);
    assert!(text.starts_with("r,cycle_growth,period,throughput,x_pre,x_post,status\n"));
}

#[test]
fn simulate_csv_brackets_each_impulse() {
    let path = write_instance("b-sim.json", INSTANCE_B);
    let out = bin()
        .args(["simulate", "--format", "csv", "--max-impulses", "5", "--instance"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,s1,s2,x,impulses"
    );
    // Each impulse shows up as two consecutive rows at the same time: the
    // pre-impulse segment end and the post-impulse segment start.
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let mut jumps = 0;
    for w in rows.windows(2) {
        if w[0][0] == w[1][0] && w[0][4] != w[1][4] {
            jumps += 1;
        }
    }
    assert_eq!(jumps, 5, "expected 5 impulse brackets in the sample table");
}

#[test]
fn verify_runs_clean_with_fixed_seed() {
    let path = write_instance("b-verify.json", INSTANCE_B);
    let out = bin()
        .args(["verify", "--instance"])
        .arg(&path)
        .env("SCF_LAB_SEED", "11")
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "verify failed:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("seed = 11"));
    assert!(text.contains("8 of 8 checks passed"));
}
