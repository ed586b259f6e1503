//! End-to-end checks of the command-line surface: artifact formats,
//! manifests, classification round-trips and exit codes.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_ldg2d")
}

fn temp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("ldg2d_cli_tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn manifest(dir: &std::path::Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).expect("manifest");
    serde_json::from_str(&text).expect("manifest json")
}

#[test]
fn analytic_export_classifies_back_to_its_state() {
    let out = temp("analytic_roundtrip");
    let status = Command::new(exe())
        .args([
            "analytic", "--mode", "strong", "--a", "1.5", "--h", "0.03125", "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let m = manifest(&out);
    assert!(m["results"]["center_q11"].as_f64().unwrap() > 0.0);

    let cls_out = temp("analytic_roundtrip_cls");
    let output = Command::new(exe())
        .args(["classify", "--field"])
        .arg(out.join("field.csv"))
        .args(["--a", "1.5", "--out"])
        .arg(&cls_out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["class"], "BD2");
    assert!(cls_out.join("defects.json").exists());
}

#[test]
fn solve_writes_field_and_stability() {
    let out = temp("solve");
    let output = Command::new(exe())
        .args([
            "solve", "--seed", "limit", "--eps", "5", "--a", "1", "--h", "0.03125", "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["class"], "WORS");
    assert_eq!(v["stable"], true);
    // The exported field parses back onto the same grid.
    let q = ldg2d::grid::QField::load_csv(out.join("field.csv")).unwrap();
    assert_eq!((q.grid.nx, q.grid.ny), (33, 33));
    let m = manifest(&out);
    assert_eq!(m["command"], "solve");
    assert_eq!(m["config"]["epsilon"], 5.0);
}

#[test]
fn relax_records_trajectory_and_terminal_class() {
    let out = temp("relax");
    let output = Command::new(exe())
        .args([
            "relax",
            "--seed",
            "nontrivial",
            "--eps",
            "0.4",
            "--a",
            "1",
            "--b",
            "1",
            "--h",
            "0.03125",
            "--snap-every",
            "2000",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["terminal_class"], "WORS");
    let traj: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("trajectory.json")).unwrap())
            .unwrap();
    let energies: Vec<f64> = traj["energies"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e.as_f64().unwrap())
        .collect();
    assert!(energies
        .windows(2)
        .all(|w| w[1] <= w[0] + 1e-10 * (1.0 + w[0].abs())));
    let snaps = traj["snapshots"].as_array().unwrap();
    assert!(!snaps.is_empty());
    assert!(out.join(snaps[0].as_str().unwrap()).exists());
    assert!(out.join("defects.json").exists());
}

#[test]
fn config_file_provides_defaults_and_flags_override() {
    let out = temp("config");
    std::fs::create_dir_all(&out).unwrap();
    let cfg_path = out.join("run.toml");
    std::fs::write(
        &cfg_path,
        "a = 1.5\nh = 0.03125\nepsilon = 4.0\n[bc]\nmode = \"dirichlet\"\nd = 0.03\n",
    )
    .unwrap();
    let run_out = out.join("run");
    let output = Command::new(exe())
        .args(["solve", "--seed", "limit", "--config"])
        .arg(&cfg_path)
        .args(["--eps", "5", "--out"]) // flag overrides the file
        .arg(&run_out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "{}",
        String::from_utf8_lossy(&output.stderr)
    );
    let m = manifest(&run_out);
    assert_eq!(m["config"]["a"], 1.5);
    assert_eq!(m["config"]["epsilon"], 5.0);
}

#[test]
fn config_errors_exit_2() {
    for args in [
        vec!["solve", "--seed", "nope", "--eps", "1"],
        vec!["solve", "--seed", "D1", "--eps=-1"],
        vec!["analytic", "--mode", "bogus"],
        vec!["classify", "--field", "/definitely/missing.csv"],
    ] {
        let output = Command::new(exe()).args(&args).output().unwrap();
        assert_eq!(output.status.code(), Some(2), "args {args:?}");
    }
}
