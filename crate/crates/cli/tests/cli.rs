use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn al(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_al"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("AL_OUT_DIR")
        .output()
        .expect("al runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn phase_flow_rotates_alpha_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let o = al(
        &["evolve", "--r", "0", "0", "--c-plus", "2", "--c-minus", "2", "--window", "-20", "20", "--h", "0.001"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&dir.path().join("final_state.csv"));
    assert_eq!(header[..5], ["site", "alpha_re", "alpha_im", "beta_re", "beta_im"]);
    let rot = (2.0f64.cos(), 2.0f64.sin());
    for r in rows {
        let (a0re, a0im) = (r[5], r[6]);
        let want = (a0re * rot.0 - a0im * rot.1, a0re * rot.1 + a0im * rot.0);
        assert!((r[1] - want.0).abs() < 1e-10 && (r[2] - want.1).abs() < 1e-10, "site {}", r[0]);
        let (b0re, b0im) = (r[7], r[8]);
        let want = (b0re * rot.0 + b0im * rot.1, -b0re * rot.1 + b0im * rot.0);
        assert!((r[3] - want.0).abs() < 1e-10 && (r[4] - want.1).abs() < 1e-10, "site {}", r[0]);
    }
}

#[test]
fn timeseries_starts_with_time_and_manifest_records_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = al(&["evolve", "--window", "-10", "10", "--t1", "0.1", "--h", "0.01"], dir.path());
    assert!(o.status.success());
    let (header, rows) = csv_rows(&dir.path().join("timeseries.csv"));
    assert_eq!(header[0], "time");
    assert!(header.contains(&"alpha_probe_re".to_string()));
    assert_eq!(rows.first().unwrap()[0], 0.0);
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["status"], "ok");
    assert_eq!(m["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(m["config"]["numerics"]["h"], 0.01);
    assert_eq!(m["config"]["window"]["n_min"], -10);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn check_passes_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = al(&["check"], dir.path());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 11);
    let r = read_json(&dir.path().join("check_report.json"));
    assert_eq!(r["all_passed"], true);
}

#[test]
fn asymptotics_reports_stability_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let o = al(&["asymptotics", "--t1", "0.5", "--h", "0.01"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("asymptotics_report.json"));
    assert!(r["stability_ratio"].as_f64().unwrap() <= 1.2);
    let (header, _) = csv_rows(&dir.path().join("asymptotics.csv"));
    assert_eq!(header, ["time", "residual_201", "residual_401"]);
}

#[test]
fn bad_config_exits_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"numerics\": { \"h\": 0.01, \"stepz\": 3 }\n}\n").unwrap();
    let o = al(&["evolve", "--config", cfg.to_str().unwrap()], &dir.path().join("o"));
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:2"), "{err}");
    assert!(err.contains("numerics"), "{err}");
}

#[test]
fn invalid_values_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["evolve", "--window", "5", "-5"][..],
        &["evolve", "--h", "-1"],
        &["evolve", "--flow", "nope"],
        &["spectrum", "--boundary", "periodic", "--window", "0", "10"],
    ] {
        let o = al(args, dir.path());
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn blowup_exits_two_and_writes_last_state() {
    let dir = tempfile::tempdir().unwrap();
    let o = al(
        &["evolve", "--r", "0", "0", "--c-plus", "0,-30", "--c-minus", "0,-30", "--window", "-5", "5", "--h", "0.01"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let e = read_json(&dir.path().join("error.json"));
    assert_eq!(e["detail"]["kind"], "blowup");
    assert!(e["detail"]["sup_norm"].as_f64().unwrap() > 1e6);
    assert!(e["detail"]["last_state"].is_object());
    assert_eq!(read_json(&dir.path().join("manifest.json"))["status"], "numerical_abort");
}

#[test]
fn env_var_sets_output_dir_and_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let env_dir = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_al"))
        .args(["support", "--window", "-5", "5"])
        .env("AL_OUT_DIR", &env_dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_dir.join("support_report.json").exists());

    let flag_dir = dir.path().join("from_flag");
    let o = Command::new(env!("CARGO_BIN_EXE_al"))
        .args(["support", "--window", "-5", "5", "--out"])
        .arg(&flag_dir)
        .env("AL_OUT_DIR", dir.path().join("unused"))
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag_dir.join("support_report.json").exists());
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{ "window": { "n_min": -8, "n_max": 8 }, "numerics": { "h": 0.05, "t1": 0.2 }, "output": { "format": "json" } }"#,
    )
    .unwrap();
    let o = al(&["evolve", "--config", cfg.to_str().unwrap(), "--h", "0.02"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["config"]["numerics"]["h"], 0.02);
    assert_eq!(m["config"]["numerics"]["t1"], 0.2);
    assert_eq!(m["config"]["window"]["n_max"], 8);
    let ts = read_json(&dir.path().join("timeseries.json"));
    assert!(ts.as_array().unwrap()[0]["time"].is_number());
}

#[test]
fn tables_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for (cmd, files) in [
        ("evolve", &["timeseries.csv", "final_state.csv", "evolve_report.json"][..]),
        ("closeness", &["closeness.csv", "closeness_report.json"]),
        ("hierarchy", &["hierarchy.csv", "hierarchy_report.json"]),
    ] {
        for d in [&a, &b] {
            let o = al(&[cmd, "--window", "-30", "30", "--t1", "0.3", "--h", "0.01"], d);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        }
        for f in files {
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
        }
    }
}

#[test]
fn spectrum_on_periodic_window_is_isospectral() {
    let dir = tempfile::tempdir().unwrap();
    let o = al(
        &["spectrum", "--boundary", "periodic", "--window", "-16", "15", "--t1", "0.5", "--h", "0.01"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("spectrum_report.json"));
    assert!(r["eigenvalue_drift"].as_f64().unwrap() < 1e-10);
    assert!(r["lax_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn hierarchy_matches_explicit_formula() {
    let dir = tempfile::tempdir().unwrap();
    let o = al(&["hierarchy", "--flow", "dnls_2", "--window", "-20", "20"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("hierarchy_report.json"));
    assert!(r["explicit_formula_max_diff"].as_f64().unwrap() < 1e-12);
    assert!(r["recursion_residual_plus"].as_f64().unwrap() < 1e-12);
}
