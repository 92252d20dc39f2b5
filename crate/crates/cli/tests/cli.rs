use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SMALL: &str = r#"{
  "name": "small",
  "sectors": [1],
  "lab": {
    "kernel_grid": {"r_min": 0.5, "r_max": 80.0, "radii": 16, "angles": 2},
    "x_window": [1.0, 10.0]
  },
  "tables": [{"kind": "ws0", "lo": 0.01, "hi": 5.0, "nodes": 12}],
  "probes": ["lp"],
  "wlog": false,
  "criteria": [1, 2, 3]
}"#;

fn waveop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_waveop"))
        .args(args)
        .env_remove("WAVEOP_THREADS")
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("small.json");
    std::fs::write(&path, SMALL).unwrap();
    path
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_config_exits_2_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = waveop(&[
        "all",
        "--config",
        dir.path().join("absent.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    for (i, text) in [r#"{"sectors": [7]}"#, r#"{"sectorz": [1]}"#, "not json"]
        .iter()
        .enumerate()
    {
        let path = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&path, text).unwrap();
        let o = waveop(&["eigensolve", "--config", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}: {}", stderr(&o));
    }
    let o = waveop(&["eigensolve", "--scenario", "no-such-scenario"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_dir_report_lists_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = waveop(&[
        "report",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        empty.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    for name in [
        "manifest.json",
        "eigenstate_l1.csv",
        "table_ws0.csv",
        "kernel_ws_l1.csv",
        "heatmap_ws_l1_theta1.svg",
        "bound_fits.csv",
        "probes_lp.csv",
        "checks.json",
    ] {
        assert!(msg.contains(name), "{name} not listed in: {msg}");
    }
}

#[test]
fn full_run_is_deterministic_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = waveop(&[
            "all",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            "1",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let mut csvs = 0;
    for entry in std::fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        let name = name.to_str().unwrap();
        if name.ends_with(".csv") {
            csvs += 1;
            let x = std::fs::read(a.join(name)).unwrap();
            let y = std::fs::read(b.join(name)).unwrap();
            assert!(x == y, "{name} differs between reruns");
            let text = String::from_utf8(x).unwrap();
            assert!(text.starts_with("# config-sha256 "), "{name} not stamped");
        }
    }
    assert!(csvs >= 5);

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    let checks = report["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .all(|c| c["anchor"].is_string() && c["verdict"] == "pass"));
    assert!(checks
        .iter()
        .any(|c| c["anchor"] == "eigenstate-l1-first-moment"));

    // flip one check: the report names it and exits 1
    let path = a.join("checks.json");
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    doc["criteria"][0]["checks"][0]["passed"] = serde_json::Value::Bool(false);
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();
    let o = waveop(&[
        "report",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        a.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("green-function-limit"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "fail");
}

#[test]
fn single_stage_writes_only_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("eig");
    let o = waveop(&[
        "eigensolve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["eigenstate_l1.csv", "eigenstate_l1.json", "manifest.json"]
    );
    let side: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("eigenstate_l1.json")).unwrap())
            .unwrap();
    assert!(side["config_hash"].as_str().unwrap().len() == 64);
    assert!(side["state"]["coupling"].as_f64().unwrap() < 0.0);
}

#[test]
fn numerical_failure_exits_3() {
    // a fit window outside the grid cannot be fitted
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("narrow.json");
    let text = SMALL.replace(
        r#""x_window": [1.0, 10.0]"#,
        r#""x_window": [100.0, 1000.0]"#,
    );
    std::fs::write(&path, text).unwrap();
    let out = dir.path().join("o");
    let o = waveop(&[
        "fit-bounds",
        "--config",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("fit-bounds"));
}
