use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(format!("{name}.json"))
}

fn polarforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polarforge")).args(args).output().unwrap()
}

fn stdout_ok(args: &[&str]) -> String {
    let out = polarforge(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    serde_json::from_str(&stdout_ok(args)).unwrap()
}

#[test]
fn info_reports_metrics() {
    let s = spec("rm_128_60");
    let v = json_ok(&["info", "--spec", s.to_str().unwrap()]);
    assert_eq!(v["K"], 60);
    assert_eq!(v["w_min"], 16);
    assert_eq!(v["dynamic_frozen"], 17);
    assert_eq!(v["xor_ops"], 0);
    let s = spec("nr_crc11_128_60");
    let v = json_ok(&["info", "--spec", s.to_str().unwrap()]);
    assert_eq!((v["dynamic_frozen"].as_u64(), v["xor_ops"].as_u64()), (Some(11), Some(375)));
}

#[test]
fn enumerate_prints_the_coefficient() {
    let s = spec("pac_128_60");
    let v = json_ok(&["enumerate", "--spec", s.to_str().unwrap()]);
    assert_eq!(v["w_min"], 16);
    assert_eq!(v["A_wmin"], 2136);
}

#[test]
fn merge_writes_a_spec() {
    let dir = tempfile::tempdir().unwrap();
    let s = spec("polar_128_60");
    let out = dir.path().to_str().unwrap();
    stdout_ok(&["merge", "--spec", s.to_str().unwrap(), "--out", out]);
    let merged = dir.path().join("spec.json");
    let v = json_ok(&["enumerate", "--spec", merged.to_str().unwrap()]);
    assert_eq!(v["A_wmin"], 2328);
}

#[test]
fn design_small_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    stdout_ok(&["design", "--n", "6", "--k", "30", "--dmin", "8", "--snr", "1.0", "--out", out]);
    let designed = dir.path().join("spec.json");
    let v = json_ok(&["info", "--spec", designed.to_str().unwrap()]);
    assert_eq!(v["K"], 30);
}

#[test]
fn decode_noiseless_frame() {
    let dir = tempfile::tempdir().unwrap();
    let llr = dir.path().join("llr.txt");
    fs::write(&llr, vec!["8.0"; 16].join(" ")).unwrap();
    let s = spec("toy_16_7");
    for alg in ["sc", "scl", "fsscl"] {
        let v = json_ok(&["decode", "--spec", s.to_str().unwrap(), "--llr", llr.to_str().unwrap(), "--algorithm", alg]);
        assert_eq!(v["message"], "0000000");
        assert_eq!(v["paths"][0]["pm"], 0.0);
    }
    fs::write(&llr, "[1.0, 2.0]").unwrap();
    assert!(!polarforge(&["decode", "--spec", s.to_str().unwrap(), "--llr", llr.to_str().unwrap()]).status.success());
}

#[test]
fn simulate_is_reproducible_across_workers() {
    let s = spec("toy_16_7");
    let run = |workers: &str| {
        stdout_ok(&[
            "simulate", "--spec", s.to_str().unwrap(), "--ebn0", "0,1.5", "--min-errors", "30",
            "--max-frames", "4000", "--seed", "5", "--workers", workers, "--list-size", "2",
        ])
    };
    let one = run("1");
    assert_eq!(one, run("8"));
    assert!(one.starts_with("ebn0_db,frames,block_errors,bler,ber,seconds\n"));
    assert_eq!(one.lines().count(), 3);
}

#[test]
fn bound_lists_points() {
    let s = spec("rm_128_60");
    let text = stdout_ok(&["bound", "--spec", s.to_str().unwrap(), "--ebn0", "4,5", "--term", "18:1114"]);
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 2);
    assert!(values[1] < values[0]);
    assert!(!polarforge(&["bound", "--spec", s.to_str().unwrap(), "--ebn0", "4", "--term", "x"]).status.success());
}

#[test]
fn run_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    fs::write(&plan, r#"{"stages": ["enumerate", "bound"], "bound": {"ebn0_db": [3.0]}}"#).unwrap();
    let s = spec("rm_128_60");
    let out = dir.path().join("out");
    stdout_ok(&["run", "--spec", s.to_str().unwrap(), "--plan", plan.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(out.join("enumerate.csv").exists());
    assert!(out.join("bound.csv").exists());
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["version"].as_str().unwrap().starts_with('v'));
    assert_eq!(manifest["k"], 60);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = polarforge(&["info", "--spec", "/nonexistent.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonexistent"));
    assert!(!polarforge(&["frobnicate"]).status.success());
}
