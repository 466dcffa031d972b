use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn warptrap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warptrap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_manifest_complete(dir: &Path) {
    let manifest = json(&dir.join("manifest.json"));
    assert_eq!(manifest["schema_version"], 1);
    let files = manifest["files"].as_array().unwrap();
    assert!(!files.is_empty());
    let mut listed: Vec<String> = files
        .iter()
        .map(|f| {
            let name = f["path"].as_str().unwrap().to_string();
            let len = fs::metadata(dir.join(&name)).unwrap().len();
            assert!(len > 0 && len == f["bytes"].as_u64().unwrap(), "{name}");
            name
        })
        .collect();
    listed.push("manifest.json".into());
    listed.sort();
    let mut present: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    present.sort();
    assert_eq!(listed, present);
}

#[test]
fn quasimode_rejects_the_nontrapping_side() {
    let dir = tempfile::tempdir().unwrap();
    let o = warptrap(&["quasimode", "--x0", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("`x0`") && err.contains("trapped side"), "{err}");
}

#[test]
fn empty_degree_range_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = warptrap(&[
        "quasimode",
        "--lmin",
        "30",
        "--lmax",
        "20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("`l_list`"));
}

#[test]
fn malformed_config_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{"m": 1, "unknown_knob": 3}"#).unwrap();
    let out = dir.path().join("out");
    let o = warptrap(&[
        "quasimode",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(!out.exists());
}

#[test]
fn quasimode_scan_emits_artifacts_that_regenerate_themselves() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a");
    let o = warptrap(&[
        "quasimode",
        "--lmin",
        "20",
        "--lmax",
        "40",
        "--lstep",
        "4",
        "--n",
        "99",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_manifest_complete(&first);
    let summary = json(&first.join("summary.json"));
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["passed"], true);
    assert!(summary["results"]["fits"]["residual_h0"]["slope"].as_f64().unwrap() < 0.0);
    let csv = fs::read_to_string(first.join("quasimode.csv")).unwrap();
    assert!(csv.starts_with("# command: quasimode\n# config: {"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 6);

    // Feeding the CSV back as the config reproduces it byte for byte.
    let second = dir.path().join("b");
    let src = first.join("quasimode.csv");
    let o = warptrap(&[
        "quasimode",
        "--config",
        src.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read(second.join("quasimode.csv")).unwrap(), fs::read(&src).unwrap());
}

#[test]
fn bracket_failure_below_the_comparison_regime_exits_with_check_failure() {
    // τ² exceeds V_l(x0/2) at l = 10..12 for m = 1 even though V_l is monotone there.
    let dir = tempfile::tempdir().unwrap();
    let o = warptrap(&[
        "quasimode",
        "--l",
        "10,11,12,13,14",
        "--n",
        "99",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    let summary = json(&dir.path().join("summary.json"));
    assert_eq!(summary["passed"], false);
    assert_eq!(summary["results"]["bracket_outside"], serde_json::json!([10, 11, 12]));
}

#[test]
fn bifurcation_rejects_a_horizon_beyond_the_causal_budget() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"t_max": 50.0, "r": 4.0, "x_max_plus": 40.0}"#).unwrap();
    let o = warptrap(&[
        "bifurcation",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain too short"));
}

#[test]
fn bifurcation_is_deterministic_and_splits_on_the_sign_of_x0() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"l_list": [40], "t_max": 30.0, "omegas": [1.0, 4.0], "n_interval": 99}"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = warptrap(&[
            "bifurcation",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in [
        "bifurcation_local_energy.csv",
        "bifurcation_ratios.csv",
        "summary.json",
        "bifurcation.gp",
    ] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    assert_manifest_complete(&a);
    let s = json(&a.join("summary.json"));
    assert!(s["results"]["le_ratio"]["contrast"].as_f64().unwrap() >= 10.0);
}

#[test]
fn confinement_and_growth_runs_pass_their_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = warptrap(&[
        "confinement",
        "--l",
        "30,50",
        "--n",
        "99",
        "--T",
        "50",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_manifest_complete(&out);
    let csv = fs::read_to_string(out.join("confinement_l50.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "t,E,E_R,ratio_E_R,LE1_running,duhamel_gap");

    let out = dir.path().join("g");
    let o = warptrap(&[
        "le1-growth",
        "--l",
        "20,40",
        "--n",
        "99",
        "--T",
        "40",
        "--threshold",
        "1e9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("summary.json"));
    assert_eq!(s["results"]["budget_exhausted"], true);
    assert!(s["results"]["trend"].is_string());
}

#[test]
fn multiplier_audit_passes_on_a_small_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"m": 2, "hardy_samples": 25}"#).unwrap();
    let out = dir.path().join("o");
    let o = warptrap(&[
        "multiplier-audit",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&out.join("summary.json"));
    assert!((s["results"]["delta"].as_f64().unwrap() - 0.4).abs() < 1e-9);
    let csv = fs::read_to_string(out.join("multiplier_audit.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("hardy,")).count(), 25);
}
