use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn peakwave(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_peakwave"))
        .args(args)
        .env("PEAKWAVE_OUT_DIR", dir)
        .output()
        .expect("spawn peakwave")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn build_wave_writes_profile_and_sidecar() {
    let d = tempfile::tempdir().unwrap();
    let o = peakwave(d.path(), &["build-wave", "--omega", "25", "--z", "1", "--half-period", "0.5", "--n", "256"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(d.path().join("build_wave.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,phi,dphi"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    // 17 significant digits
    assert_eq!(first[1].split('e').next().unwrap().replace(['-', '.'], "").len(), 17);
    assert_eq!(csv.lines().count(), 257);
    let j = json(&d.path().join("build_wave.json"));
    assert_eq!(j["result"]["all_green"], Value::Bool(true));
    assert_eq!(j["file"], "build_wave.csv");
    assert!(j["versions"]["peakwave"].is_string());
    assert!(j["result"]["diagnostics"]["pde_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn classical_wave_reports_zero_shift() {
    let d = tempfile::tempdir().unwrap();
    let o = peakwave(d.path(), &["build-wave", "--omega", "25", "--z", "0", "--half-period", "0.5", "--n", "64"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&d.path().join("build_wave.json"))["result"]["shift"].as_f64(), Some(0.0));
}

#[test]
fn admissibility_failures_name_the_condition() {
    let d = tempfile::tempdir().unwrap();
    let o = peakwave(d.path(), &["build-wave", "--omega", "0.2", "--z", "1", "--half-period", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ω ≤ Z²/4"), "{}", stderr(&o));
    let o = peakwave(d.path(), &["build-wave", "--omega", "8", "--z", "1", "--half-period", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("π²/(2L²)"));
    let o = peakwave(d.path(), &["classify", "--omega", "20", "--z", "-1", "--half-period", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("2L ≤ T₁(ω,Z)="));
}

#[test]
fn classify_negative_defect() {
    let d = tempfile::tempdir().unwrap();
    let o = peakwave(d.path(), &["classify", "--omega", "60", "--z", "-1", "--half-period", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = &json(&d.path().join("classify.json"))["result"];
    assert_eq!(r["n_negative"], 2);
    assert_eq!(r["p_index"], 1);
    assert_eq!(r["label"], "unstable + stable_even_subspace");
}

#[test]
fn strict_inconclusive_exits_4() {
    let d = tempfile::tempdir().unwrap();
    let args = ["classify", "--omega", "20", "--z", "0.01", "--half-period", "0.5", "--n", "128"];
    assert_eq!(peakwave(d.path(), &args).status.code(), Some(0));
    let mut strict = vec!["--strict"];
    strict.extend(args);
    assert_eq!(peakwave(d.path(), &strict).status.code(), Some(4));
}

#[test]
fn delta_spectrum_interleaves() {
    let d = tempfile::tempdir().unwrap();
    let o = peakwave(d.path(), &["delta-spectrum", "--gamma", "1", "--half-period", "3.14159", "--count", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&d.path().join("delta_spectrum.json"))["result"]["interleaved"], Value::Bool(true));
    let csv = fs::read_to_string(d.path().join("delta_spectrum.csv")).unwrap();
    assert!(csv.starts_with("index,eigenvalue,kind,parity"));
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn spectrum_with_vectors() {
    let d = tempfile::tempdir().unwrap();
    let o = peakwave(d.path(), &["spectrum", "--omega", "20", "--z", "1", "--half-period", "0.5", "--n", "128", "--op", "l1", "--vectors", "--count", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = json(&d.path().join("spectrum_l1.json"));
    assert_eq!(j["result"]["n_negative"], 1);
    let v = fs::read_to_string(d.path().join("spectrum_l1_vectors.csv")).unwrap();
    assert!(v.starts_with("x,v0,v1,v2"));
    assert!(d.path().join("spectrum_l1_vectors.json").exists());
}

#[test]
fn evolve_is_deterministic_per_seed() {
    let d = tempfile::tempdir().unwrap();
    let run = |prefix: &str, seed: &str| {
        let args = [
            "--prefix", prefix, "evolve", "--omega", "20", "--z", "1", "--half-period", "0.5", "--n", "64", "--dt", "1e-4",
            "--T", "0.05", "--records", "10", "--perturb", "random:1e-3", "--seed", seed,
        ];
        let o = peakwave(d.path(), &args);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        fs::read(d.path().join(format!("{prefix}.csv"))).unwrap()
    };
    let a = run("a", "7");
    assert_eq!(a, run("b", "7"));
    assert_ne!(a, run("c", "8"));
    let j = json(&d.path().join("a.json"));
    assert!(j["result"]["charge_drift"].as_f64().unwrap() < 1e-10);
    assert_eq!(j["config"]["evolve"]["seed"], 7);
}

#[test]
fn evolve_rejects_large_dt() {
    let d = tempfile::tempdir().unwrap();
    let o = peakwave(d.path(), &["evolve", "--omega", "20", "--z", "1", "--half-period", "0.5", "--dt", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn evolve_snapshot() {
    let d = tempfile::tempdir().unwrap();
    let o = peakwave(
        d.path(),
        &["evolve", "--omega", "20", "--z", "1", "--half-period", "0.5", "--n", "32", "--T", "0.01", "--snapshot"],
    );
    assert_eq!(o.status.code(), Some(0));
    let s = fs::read_to_string(d.path().join("evolve_snapshot.csv")).unwrap();
    assert!(s.starts_with("x,re,im"));
    assert_eq!(s.lines().count(), 33);
}

#[test]
fn sweep_writes_sorted_lattice() {
    let d = tempfile::tempdir().unwrap();
    let o = peakwave(
        d.path(),
        &[
            "sweep", "--omega-min", "20", "--omega-max", "60", "--omega-count", "3", "--z-min", "-1", "--z-max", "1",
            "--z-count", "2", "--half-period", "0.5", "--n", "128",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(d.path().join("sweep.csv")).unwrap();
    let idx: Vec<usize> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(idx, (0..6).collect::<Vec<_>>());
    assert!(csv.contains("inadmissible") && csv.contains(",stable,"));
    assert_eq!(json(&d.path().join("sweep.json"))["result"]["points"], 6);
}

#[test]
fn out_dir_flag_overrides_env() {
    let d = tempfile::tempdir().unwrap();
    let e = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_peakwave"))
        .args(["--out-dir", d.path().to_str().unwrap(), "delta-spectrum", "--gamma", "-2", "--half-period", "1"])
        .env("PEAKWAVE_OUT_DIR", e.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("delta_spectrum.csv").exists());
    assert!(!e.path().join("delta_spectrum.csv").exists());
}

#[test]
fn usage_errors_exit_1() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(peakwave(d.path(), &["--bogus"]).status.code(), Some(1));
    assert_eq!(peakwave(d.path(), &["evolve", "--omega", "20", "--z", "1", "--half-period", "0.5", "--perturb", "wobble:1"]).status.code(), Some(1));
}
