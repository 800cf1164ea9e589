use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hqc-sim"));
    cmd.env_remove("HOLONOMY_SIM_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn hqc-sim")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("gate JSON on stdout")
}

#[test]
fn gate_reaches_pi_at_first_bessel_root() {
    let out = run(&["gate", "--kind", "phase", "--a", "1.2024", "--T", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let gamma = v["gamma_measured"].as_f64().unwrap();
    assert!((gamma.abs() - std::f64::consts::PI).abs() < 0.05);
    assert!(v["unitarity_defect"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn gate_with_zero_amplitude_is_trivial() {
    let out = run(&["gate", "--kind", "phase", "--a", "0", "--T", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["gamma_measured"].as_f64().unwrap().abs() < 1e-9);
    assert!(v["f"].as_f64().unwrap() > 1.0 - 1e-9);
}

#[test]
fn cphase_diagonal_is_one_one_one_minus_one() {
    let out = run(&["gate", "--kind", "cphase", "--a", "1.2024", "--T", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let phases: Vec<f64> =
        json(&out)["diagonal_phases"].as_array().unwrap().iter().map(|p| p.as_f64().unwrap()).collect();
    let target = [0.0, 0.0, 0.0, std::f64::consts::PI];
    for (p, t) in phases.iter().zip(target) {
        let d = (p - t).rem_euclid(2.0 * std::f64::consts::PI);
        assert!(d.min(2.0 * std::f64::consts::PI - d) < 0.05, "{phases:?}");
    }
}

#[test]
fn gate_with_inline_control_and_file_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gate.json");
    let out = run(&[
        "gate",
        "--kind",
        "phase",
        "--a",
        "0.7605",
        "--T",
        "1",
        "--control",
        "positive-square:J=200,dt=0.005,p=0.5,seed=4",
        "--steps",
        "5000",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["f"].as_f64().unwrap() > 0.95);
    assert!(v["steps"].as_u64().unwrap() >= 5000);
    assert_eq!(v["gate_measured"].as_array().unwrap().len(), 2);
}

#[test]
fn gate_rejects_bad_arguments() {
    assert_eq!(run(&["gate", "--kind", "phase", "--a", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["gate", "--kind", "sideways", "--a", "0.5", "--T", "1"]).status.code(), Some(2));
    assert_eq!(run(&["gate", "--kind", "phase", "--a", "0.5", "--T", "-1"]).status.code(), Some(2));
    assert_eq!(
        run(&["gate", "--kind", "phase", "--a", "0.5", "--T", "1", "--control", "zigzag"]).status.code(),
        Some(2)
    );
}

fn sweep(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["sweep", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn small_config(dir: &Path) -> PathBuf {
    let text = std::fs::read_to_string(configs().join("mean-control.toml")).unwrap();
    let start = text.find("[grid]").unwrap();
    let end = start + text[start..].find("\n\n").unwrap();
    let text = format!("{}[grid]\nstart = 0.0\nstop = 60.0\npoints = 4{}", &text[..start], &text[end..])
        .replace("realizations = 10", "realizations = 3");
    let path = dir.join("small.toml");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn sweep_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let cfg = cfg.to_str().unwrap();
    let mut csvs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "1"), ("c", "3")] {
        let out_dir = dir.path().join(name);
        let out = bin()
            .args(["--threads", threads, "sweep", "--experiment", "mean-control", "--config", cfg, "--seed", "9"])
            .args(["--out-dir", out_dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        csvs.push(std::fs::read(out_dir.join("mean-control.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(csvs[0], csvs[2]);

    // The environment variable is the fallback for --threads.
    let out_dir = dir.path().join("env");
    let out = bin()
        .env("HOLONOMY_SIM_THREADS", "2")
        .args(["sweep", "--experiment", "mean-control", "--config", cfg, "--seed", "9"])
        .args(["--out-dir", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(out_dir.join("mean-control.csv")).unwrap(), csvs[0]);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["threads"], 2);
    assert_eq!(manifest["master_seed"], 9);
}

#[test]
fn runtime_sweep_writes_csv_manifest_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweep(
        dir.path(),
        &["--experiment", "runtime", "--config", configs().join("runtime.toml").to_str().unwrap(), "--plot"],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("runtime.csv")).unwrap();
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').take(4).map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r[1..].iter().all(|f| (0.0..=1.0).contains(f))));
    assert!(rows[39][1] >= 0.99 && rows[39][1] > rows[0][1]);

    let svg = std::fs::read_to_string(dir.path().join("runtime.svg")).unwrap();
    let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
    let points = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
    assert_eq!(points.split(' ').count(), 40);

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "runtime");
    assert!(manifest["total_steps"].as_u64().unwrap() > 0);
    assert!(manifest["rng_algorithm"].as_str().unwrap().contains("ChaCha8"));
    let outputs: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(outputs, ["runtime.csv", "runtime.svg", "runtime.json", "manifest.json"]);
}

#[test]
fn dt_sweep_plot_marks_resonances() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("dt-zero-energy.toml")).unwrap();
    // Swap the range table for an explicit top-level list: n pi / J for n = 2, 3, 4.
    let start = text.find("[grid]").unwrap();
    let end = start + text[start..].find("\n\n").unwrap() + 2;
    let text = format!(
        "grid = [0.0628318530717958, 0.0942477796076938, 0.125663706143592]\n{}{}",
        &text[..start],
        &text[end..]
    );
    let cfg = dir.path().join("dt.toml");
    std::fs::write(&cfg, text).unwrap();
    let out = sweep(
        &dir.path().join("out"),
        &["--experiment", "dt-zero-energy", "--config", cfg.to_str().unwrap(), "--plot"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(dir.path().join("out/dt-zero-energy.svg")).unwrap();
    assert_eq!(svg.matches("class=\"resonance\"").count(), 2);
}

#[test]
fn kick_equivalence_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweep(dir.path(), &["--experiment", "kick-equivalence"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("kick-equivalence.csv")).unwrap();
    let fields: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(fields[1] <= 1e-10);
    assert!((fields[2] - fields[0] * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn sweep_error_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "bogus = 1\n").unwrap();
    let out = sweep(&dir.path().join("o"), &["--experiment", "runtime", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let runtime = configs().join("runtime.toml");
    let out = sweep(&dir.path().join("o"), &["--experiment", "mean-control", "--config", runtime.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("nope.toml");
    let out = sweep(&dir.path().join("o"), &["--experiment", "runtime", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let file = dir.path().join("plain");
    std::fs::write(&file, "").unwrap();
    let out = sweep(&file.join("sub"), &["--experiment", "kick-equivalence"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        hqc_core::ExperimentConfig::from_toml_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn selftest_exit_codes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let groups: std::collections::BTreeSet<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.contains("PASS") || l.contains("FAIL"))
        .map(|l| l.split_whitespace().next().unwrap())
        .collect();
    assert!(groups.len() >= 6, "{groups:?}");

    let out = run(&["selftest", "--inject-fault", "h1-sign"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));
}
