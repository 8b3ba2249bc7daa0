use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn sarplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sarplan"))
        .args(args)
        .env_remove("SARPLAN_SERVER")
        .output()
        .expect("run sarplan")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(v).unwrap()).unwrap();
    p.to_str().unwrap().to_owned()
}

fn small_scenario() -> Value {
    serde_json::from_slice(&std::fs::read(scenarios().join("50x50_wheeled.json")).unwrap()).unwrap()
}

fn plan_to(dir: &Path, scenario: &str, extra: &[&str]) -> (Output, PathBuf) {
    let out = dir.join("plan.json");
    let mut args = vec!["plan", "--scenario", scenario, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (sarplan(&args), out)
}

#[test]
fn plan_writes_result_and_side_files() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", &small_scenario());
    let (o, out) = plan_to(dir.path(), &sc, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("fleet_size: 3"));
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "planned");
    for f in ["plan.trace.csv", "plan.costs.csv", "plan.solver.jsonl"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let costs = std::fs::read_to_string(dir.path().join("plan.costs.csv")).unwrap();
    assert!(costs.starts_with("epoch,robot,"));
}

#[test]
fn too_small_fleet_limit_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small_scenario();
    s["tfs"] = json!(2);
    let sc = write(dir.path(), "s.json", &s);
    let (o, _) = plan_to(dir.path(), &sc, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("17"), "{}", stdout(&o));
}

#[test]
fn bad_input_exits_1_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small_scenario();
    s["err"] = json!(0);
    let sc = write(dir.path(), "s.json", &s);
    let (o, _) = plan_to(dir.path(), &sc, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/err"));

    let o = sarplan(&["plan", "--scenario", dir.path().join("missing.json").to_str().unwrap(), "--out", "x.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn single_worker_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", &small_scenario());
    let (_, out) = plan_to(dir.path(), &sc, &["--workers", "1", "--mode", "exact"]);
    let a = std::fs::read(&out).unwrap();
    let (_, out) = plan_to(dir.path(), &sc, &["--workers", "1", "--mode", "exact"]);
    let b = std::fs::read(&out).unwrap();
    assert_eq!(a, b);
}

#[test]
fn validate_accepts_planner_output_and_flags_edits() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", &small_scenario());
    let (_, out) = plan_to(dir.path(), &sc, &[]);
    let o = sarplan(&["validate", "--plan", out.to_str().unwrap(), "--scenario", &sc]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("no violations"));

    let plan: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let mut teleport = plan.clone();
    teleport["plan"]["robots"][0]["path"][2] = json!([3, 4, 4]);
    let p = write(dir.path(), "teleport.json", &teleport);
    let o = sarplan(&["validate", "--plan", &p, "--scenario", &sc]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("mobility"), "{}", stdout(&o));

    // Same plan, but the robots carry almost no charge.
    let mut weak = small_scenario();
    weak["initial_battery_j"] = json!(200.0);
    let weak = write(dir.path(), "weak.json", &weak);
    let o = sarplan(&["validate", "--plan", out.to_str().unwrap(), "--scenario", &weak]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("battery_underflow"), "{}", stdout(&o));
}

#[test]
fn sweep_writes_one_curve_per_fleet_size() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", &small_scenario());
    let out = dir.path().join("sweep");
    let o = sarplan(&["sweep", "--scenario", &sc, "--r-min", "1", "--r-max", "5", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    for r in 1..=5 {
        let csv = std::fs::read_to_string(out.join(format!("curve_r{r}.csv"))).unwrap();
        assert!(csv.starts_with("epoch,explored_pct"));
    }
    assert!(out.join("sweep.csv").exists());
    assert!(out.join("sweep.json").exists());

    let o = sarplan(&["sweep", "--scenario", &sc, "--r-min", "4", "--r-max", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn profiles_prints_both_tables() {
    let o = sarplan(&["profiles"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("  Total, 297.77"));
    assert!(s.contains("  Total, 28.64"));
    assert!(s.contains("3D LiDAR and SLAM, 56.84"));
    assert!(s.contains("Motion 1 m/s, 7.40"));
}

#[test]
fn model_text_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let s = json!({
        "area": {"width_m": 20, "height_m": 20},
        "err": 1.0, "trt_s": 40, "tfs": 4,
        "speed_mps": 1, "epoch_s": 10, "profile": "wheeled"
    });
    let sc = write(dir.path(), "s.json", &s);
    let out = dir.path().join("model.txt");
    let o = sarplan(&["model", "--scenario", &sc, "--fleet-size", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(std::fs::read_to_string(out).unwrap().contains("d[1]"));
}
