use std::process::{Command, Output};

use serde_json::Value;

fn starforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_starforge")).args(args).env_remove("STARFORGE_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_fx_a_summary() {
    let o = starforge(&["analyze", "--input", "fx-a"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next().unwrap(), "h-local: yes; |Star|=2; |Star_stab|=2; G_v = R/Q");
}

#[test]
fn analyze_fx_b_reports_a_bound() {
    let o = starforge(&["analyze", "--input", "fx-b", "--format", "structured"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["body"]["h_local"], Value::Bool(false));
    assert_eq!(v["body"]["star_count"]["exact"], Value::Bool(false));
    assert!(v["body"]["star_count"]["value"].as_u64().unwrap() >= 3);
    assert_eq!(v["body"]["stable_count"], 2);
}

#[test]
fn malformed_file_gives_diagnostics_and_exit_2() {
    let dir = std::env::temp_dir().join(format!("starforge-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"forest\": [\n  {\"name\": \"M\", \"group\": \"Z\"},\n  {\"name\": }\n]}").unwrap();
    let o = starforge(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("3:"), "{err}");

    std::fs::write(&bad, r#"{"forest": [{"name": "M", "group": "Z"}, {"name": "M", "group": "Q"}]}"#).unwrap();
    let o = starforge(&["analyze", "--input", bad.to_str().unwrap(), "--format", "structured"]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "input");
    assert!(!v["error"]["diagnostics"].as_array().unwrap().is_empty());
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn eval_flags() {
    let o = starforge(&["eval", "--input", "fx-a", "d", "R"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("; closed;"), "{}", stdout(&o));

    let o = starforge(&["eval", "--input", "fx-a", "v", "max:M1", "--format", "structured"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["body"]["closed"], Value::Bool(false));
    assert_eq!(v["body"]["closure"], "M1: >= (0) @level 1; M2: >= (0) @level 1");

    let o = starforge(&["eval", "--input", "fx-a", "spec(M7)", "R"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_suites_and_exit_codes() {
    let o = starforge(&["check", "witness.intersez", "--input", "fx-b", "--format", "structured"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let line = &v["body"]["lines"][0];
    assert_eq!(line["status"], "pass");
    assert_eq!(line["witness"].as_array().unwrap().len(), 4);
    assert!(line["anchor"].is_string() && line["evidence"].is_string());

    let o = starforge(&["check", "no-such-suite", "--input", "fx-a"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_falls_back_to_environment() {
    let run = |env: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_starforge"));
        c.args(["check", "lambda-rho", "--input", "fx-a", "--samples", "20", "--format", "structured"]);
        match env {
            Some(s) => c.env("STARFORGE_SEED", s),
            None => c.env_remove("STARFORGE_SEED"),
        };
        let v: Value = serde_json::from_slice(&c.output().unwrap().stdout).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(run(Some("77")), 77);
    assert_eq!(run(None), 0);
}

#[test]
fn structured_check_is_reproducible() {
    let args = ["check", "all", "--input", "fx-c", "--seed", "5", "--samples", "40", "--format", "structured"];
    let (a, b) = (starforge(&args), starforge(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
