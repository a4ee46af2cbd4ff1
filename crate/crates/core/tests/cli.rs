use std::path::PathBuf;
use std::process::{Command, Output};

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(rel).to_string_lossy().into_owned()
}

fn coded_pir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coded-pir")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn rate_examples() {
    let o = coded_pir(&["rate", "--variant", "prototype", "--n", "4", "--k", "2", "--t", "2", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("36/91"));

    let o = coded_pir(&["rate", "--variant", "byzantine", "--n", "8", "--b", "1", "--k", "2", "--t", "2", "--m", "2"]);
    assert!(stdout(&o).contains("7/27"));
}

#[test]
fn rate_rejects_violated_inequality() {
    let o = coded_pir(&["rate", "--variant", "robust", "--n", "4", "--s", "2", "--k", "2", "--t", "2", "--m", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("C(N−S,K) > C(N,K) − C(N−T,K)"));
}

#[test]
fn missing_flags_exit_two() {
    assert_eq!(coded_pir(&["rate", "--variant", "prototype", "--n", "4"]).status.code(), Some(2));
    assert_eq!(coded_pir(&["rate", "--bogus"]).status.code(), Some(2));
}

#[test]
fn simulate_robust_sweep_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("robust.json");
    let o = coded_pir(&[
        "simulate",
        "--config",
        &data("configs/robust.json"),
        "--sweep-adversaries",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["achieved"], "8/19");
    assert_eq!(report["closed_form"], "8/19");
    assert_eq!(report["match"], true);
    assert_eq!(report["placements"].as_array().unwrap().len(), 6);
}

#[test]
fn simulate_multifile_config() {
    let o = coded_pir(&["simulate", "--config", &data("configs/multifile.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("achieved     12/17"));
}

#[test]
fn simulate_detects_excess_byzantine_servers() {
    let o = coded_pir(&["simulate", "--config", &data("configs/byzantine.json"), "--corrupt", "2,5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn shipped_configs_agree_with_closed_form() {
    for name in ["prototype", "robust", "byzantine", "multifile", "pattern"] {
        let cfg = data(&format!("configs/{name}.json"));
        let rate = stdout(&coded_pir(&["rate", "--config", &cfg]));
        let closed =
            rate.lines().find(|l| l.starts_with("rate")).unwrap().split_whitespace().nth(1).unwrap().to_owned();
        let sim = coded_pir(&["simulate", "--config", &cfg]);
        assert_eq!(sim.status.code(), Some(0), "{name}");
        assert!(stdout(&sim).contains(&format!("achieved     {closed}")), "{name}");
    }
}

#[test]
fn audit_prototype_and_robust() {
    let o = coded_pir(&["audit", "--config", &data("configs/prototype.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("ranks [180, 180, 180]").count(), 6);

    let o = coded_pir(&["audit", "--config", &data("configs/robust.json")]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("ranks [90, 90]").count(), 15);
}

#[test]
fn audit_pattern_all_pairs_warns_but_passes() {
    let o = coded_pir(&["audit", "--config", &data("configs/pattern.json"), "--all-pairs"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("[0, 2]")).unwrap();
    assert!(line.contains("FAIL") && line.contains("outside pattern"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn pattern_opt_examples() {
    let o = coded_pir(&["pattern-opt", "--pattern", &data("pentagon_pattern.json"), "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["family"]["blocks"].as_array().unwrap().len(), 5);
    assert_eq!(v["rate"], "5/9");

    let o = coded_pir(&["pattern-opt", "--pattern", &data("all_pairs_n4.json"), "--k", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ratio"], "5/6");
    let theorem_rate =
        stdout(&coded_pir(&["rate", "--variant", "prototype", "--n", "4", "--k", "2", "--t", "2", "--m", "2"]));
    assert!(theorem_rate.contains(v["rate"].as_str().unwrap()));

    assert_eq!(coded_pir(&["pattern-opt", "--pattern", &data("whole_set.json"), "--k", "2"]).status.code(), Some(2));
}

#[test]
fn pattern_config_without_family_uses_optimizer() {
    let o = coded_pir(&[
        "rate",
        "--variant",
        "pattern",
        "--pattern",
        &data("pentagon_pattern.json"),
        "--k",
        "3",
        "--m",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("5/9"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["build", "simulate", "audit"] {
        let a = dir.path().join(format!("{cmd}-a.json"));
        let b = dir.path().join(format!("{cmd}-b.json"));
        for out in [&a, &b] {
            let o = coded_pir(&[cmd, "--config", &data("configs/byzantine.json"), "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0));
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{cmd}");
    }
}

#[test]
fn build_dumps_versioned_plan() {
    let o = coded_pir(&["build", "--config", &data("configs/prototype.json")]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["l_rows"], 216);
    assert_eq!(v["blocks"].as_array().unwrap().len(), 91);
}

#[test]
fn bounds_table() {
    let o = coded_pir(&["bounds", "--n", "4", "--k", "1", "--t", "2", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().find(|l| l.trim_start().starts_with("2 ")).unwrap();
    assert_eq!(row.split_whitespace().collect::<Vec<_>>(), ["2", "4/5", "4/5"]);
}
