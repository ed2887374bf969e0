use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn intermed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intermed")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = intermed(&all);
    let json = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{args:?}: {e}\n{}", String::from_utf8_lossy(&out.stderr));
    });
    (out.status.code().unwrap(), json)
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("intermed-cli-{}-{name}", std::process::id()))
}

#[test]
fn exit_codes_follow_verdicts() {
    let e1 = fixture("e1.json");
    let e2 = fixture("e2.json");
    let e3 = fixture("e3.json");
    let cases: Vec<Vec<&str>> = vec![
        vec!["validate", "--economy", &e1],
        vec!["check", "ic", "--economy", &e1],
        vec!["check", "cmon", "--economy", &e3],
        vec!["check", "du", "--economy", &e1],
        vec!["check", "du", "--economy", &e3],
        vec!["check", "indifference", "--economy", &e3],
        vec!["transfers", "--economy", &e1],
        vec!["policy", "eval", "--economy", &e1],
        vec!["verify", "partial", "--economy", &e1],
        vec!["find-deviation", "--economy", &e2],
    ];
    for args in cases {
        let (code, json) = report(&args);
        let expected = match json["verdict"].as_str().unwrap() {
            "holds" | "supported" => 0,
            "refuted" | "infeasible" => 1,
            other => panic!("{args:?}: unexpected verdict {other}"),
        };
        assert_eq!(code, expected, "{args:?}");
    }
}

#[test]
fn du_on_e1_holds_and_on_e3_fails() {
    let (e1, e3) = (fixture("e1.json"), fixture("e3.json"));
    assert_eq!(report(&["check", "du", "--economy", &e1]).0, 0);
    let (code, json) = report(&["check", "du", "--economy", &e3]);
    assert_eq!(code, 1);
    assert_eq!(json["verdict"], "refuted");
}

#[test]
fn json_report_is_stable_across_runs() {
    let e2 = fixture("e2.json");
    let args = ["find-deviation", "--economy", &e2, "--json"];
    let a = intermed(&args);
    let b = intermed(&args);
    assert_eq!(a.stdout, b.stdout);
    let parsed: Value = serde_json::from_slice(&a.stdout).unwrap();
    let mut again = serde_json::to_string_pretty(&parsed).unwrap();
    again.push('\n');
    assert_eq!(again.as_bytes(), a.stdout.as_slice());
    assert!(parsed["timing"].is_null());
}

#[test]
fn wall_time_is_opt_in() {
    let e1 = fixture("e1.json");
    let (_, json) = report(&["check", "ic", "--economy", &e1, "--wall-time"]);
    assert!(json["timing"]["wall_ms"].is_u64());
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(intermed(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(intermed(&["check", "ic"]).status.code(), Some(2));
    assert_eq!(intermed(&["check", "ic", "--economy", "/nonexistent/economy.json"]).status.code(), Some(2));
    let out = intermed(&["check", "ic", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let json: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["verdict"], "error");
}

#[test]
fn du_guard_needs_force() {
    let twelve = fixture("twelve_types.json");
    let out = intermed(&["check", "du", "--economy", &twelve]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--force"));
}

#[test]
fn transfers_reports_target_prices() {
    let e1 = fixture("e1.json");
    let (code, json) = report(&["transfers", "--economy", &e1, "--mode", "maximal"]);
    assert_eq!(code, 0);
    let prices = &json["witnesses"]["prices"];
    assert_eq!(prices["theta1"], 10.0);
    assert_eq!(prices["theta2"], 18.0);
}

#[test]
fn demo_documents_load() {
    let cases: [(&str, Vec<&str>); 4] = [
        ("car.json", vec!["demo", "car-sales"]),
        ("car2.json", vec!["demo", "car-sales", "--interdependent"]),
        ("tax.json", vec!["demo", "taxation"]),
        ("tax2.json", vec!["demo", "taxation", "--technology", "labor-hours"]),
    ];
    for (name, args) in cases {
        let path = temp(name);
        let path_str = path.to_string_lossy().into_owned();
        let mut all = args.clone();
        all.push("--emit");
        let out = intermed(&all);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        std::fs::write(&path, &out.stdout).unwrap();
        let (code, json) = report(&["validate", "--economy", &path_str]);
        let _ = std::fs::remove_file(&path);
        assert_eq!(code, 0, "{args:?}: {json}");
    }
}

#[test]
fn insurance_demo_runs() {
    let (code, json) = report(&["demo", "insurance"]);
    assert_eq!(code, 0, "{json}");
}

#[test]
fn bad_equilibrium_profile_round_trips() {
    let e3 = fixture("e3.json");
    let (code, json) = report(&["bad-equilibrium", "--economy", &e3, "--policy", "hat-distr"]);
    assert_eq!(code, 1);
    let path = temp("profile.json");
    std::fs::write(&path, json["witnesses"]["bad_equilibrium"]["profile"].to_string()).unwrap();
    let path_str = path.to_string_lossy().into_owned();
    let (code, eval) = report(&["policy", "eval", "--economy", &e3, "--policy", "hat-distr", "--profile", &path_str]);
    let _ = std::fs::remove_file(&path);
    assert_eq!(code, 0, "{eval}");
}
