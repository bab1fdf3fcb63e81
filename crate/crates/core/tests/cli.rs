use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn otcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otcert")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("otcert-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn gen(dir: &Path, file: &str, args: &[&str]) -> PathBuf {
    let out = otcert(&[&["gen"], args].concat());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.join(file);
    std::fs::write(&path, &out.stdout).unwrap();
    path
}

fn json_report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn solve_zero_diagonal_and_infeasible() {
    let dir = scratch("solve");
    let diag = dir.join("diag.json");
    std::fs::write(&diag, r#"{"mu":["1/2","1/2"],"nu":["1/2","1/2"],"cost":[[0,1],[1,0]]}"#).unwrap();
    let out = otcert(&["solve", diag.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_report(&out)["details"]["value"], "0");

    let inf = dir.join("inf.json");
    std::fs::write(&inf, r#"{"mu":[1],"nu":[1],"cost":[["inf"]]}"#).unwrap();
    let out = otcert(&["solve", inf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("no finite plan"));
}

#[test]
fn check_shift_plan_fails_with_cycle() {
    let dir = scratch("check");
    let ap = gen(&dir, "ap.json", &["ap", "--n", "3", "--a", "1", "--b", "2", "--plan", "shift"]);
    let out = otcert(&["check", ap.to_str().unwrap(), "--json", "--trials", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let r = json_report(&out);
    let verdicts = r["verdicts"].as_array().unwrap();
    let monotone = verdicts.iter().find(|v| v["claim"] == "(2) c-monotone").unwrap();
    assert_eq!(monotone["pass"], false);
    assert_eq!(monotone["witness"]["gap"], "3");
    assert!(verdicts.iter().filter(|v| v["claim"].as_str().unwrap().contains('=')).all(|v| v["pass"] == true));

    let good = gen(&dir, "good.json", &["ap", "--n", "3", "--a", "1", "--b", "2", "--plan", "identity"]);
    let out = otcert(&["check", good.to_str().unwrap(), "--z-size", "2", "--lambda", "0.5", "--trials", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn improve_reports_trajectory() {
    let dir = scratch("improve");
    let ap = gen(&dir, "ap.json", &["ap", "--n", "3", "--a", "1", "--b", "2", "--plan", "shift"]);
    let out = otcert(&["improve", ap.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_report(&out)["details"]["trajectory"], serde_json::json!(["2", "1"]));

    let out = otcert(&["improve", ap.to_str().unwrap(), "--max-iters", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("budget_exhausted"));
}

#[test]
fn plan_from_separate_file() {
    let dir = scratch("planfile");
    let inst = dir.join("inst.json");
    std::fs::write(&inst, r#"{"mu":["1/2","1/2"],"nu":["1/2","1/2"],"cost":[[0,1],[1,0]]}"#).unwrap();
    let plan = dir.join("plan.json");
    std::fs::write(&plan, r#"[[0,"1/2"],["1/2",0]]"#).unwrap();
    let out = otcert(&["improve", inst.to_str().unwrap(), "--plan", plan.to_str().unwrap(), "--json"]);
    assert_eq!(json_report(&out)["details"]["trajectory"], serde_json::json!(["1", "0"]));
}

#[test]
fn gen_round_trips_and_float_mode() {
    let dir = scratch("gen");
    for (name, args) in [
        ("ap", vec!["ap", "--n", "5", "--a", "2", "--b", "1"]),
        ("shift", vec!["shift", "--n", "6"]),
        ("zero-one", vec!["zero-one", "--n", "8"]),
        ("random", vec!["random", "--n", "4", "--inf-density", "0.3", "--seed", "5"]),
    ] {
        let path = gen(&dir, &format!("{name}.json"), &args);
        let text = std::fs::read_to_string(&path).unwrap();
        otcert::io::parse_instance::<otcert::scalar::Rational>(&text).expect("round trip");
        let out = otcert(&["solve", path.to_str().unwrap(), "--float"]);
        assert!(out.status.code().is_some_and(|c| c <= 1), "{name}");
    }
    let out = otcert(&["gen", "zero-one", "--n", "2", "--float"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["cost"][1][0].as_f64().unwrap() - (1.0 - 0.5f64.sqrt())).abs() < 1e-12);
}

#[test]
fn input_errors_exit_two() {
    let dir = scratch("errors");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"mu":["1/2"],"nu":[1],"cost":[[0]]}"#).unwrap();
    assert_eq!(otcert(&["solve", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(otcert(&["solve", dir.join("missing.json").to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(otcert(&["gen", "nope"]).status.code(), Some(2));
    assert_eq!(otcert(&["gen", "ap", "--a", "x"]).status.code(), Some(2));
}

#[test]
fn kellerer_command() {
    let dir = scratch("kellerer");
    let mmi = dir.join("mmi.json");
    std::fs::write(&mmi, r#"{"weights":[["1/2","1/2"],["1/2","1/2"],["1/2","1/2"]],"B":[[0,0,1],[0,1,0],[1,0,0]]}"#).unwrap();
    let out = otcert(&["kellerer", mmi.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json_report(&out);
    assert_eq!((r["details"]["P"].as_str(), r["details"]["L"].as_str()), (Some("3/4"), Some("1")));
}

#[test]
fn batch_directory() {
    let dir = scratch("batch");
    gen(&dir, "a.json", &["ap", "--n", "3", "--a", "2", "--b", "1"]);
    gen(&dir, "b.json", &["random", "--n", "3", "--seed", "1"]);
    let out = otcert(&["check", "--batch", dir.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("a.json") && text.contains("b.json"));
}
