use std::process::{Command, Output};

use serde_json::Value;

fn liouvik(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liouvik")).args(args).output().expect("binary runs")
}

fn json_out(args: &[&str]) -> Value {
    let out = liouvik(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_exponential_growth() {
    let v = json_out(&["classify", "--x1", "1", "--x2", "x2", "--quiet"]);
    assert_eq!(v["schema"], "1");
    let c = &v["classification"];
    assert_eq!(c["level_found"], 1);
    assert_eq!(c["status"], "witnessed");
    assert_eq!(c["coefficient_field"], "Q");
    assert_eq!(c["witness"]["n"], 1);
    assert_eq!(c["witness"]["a"], "1/x2");
    assert_eq!(v["certificate"]["verified"], true);
    assert_eq!(v["numeric"]["result"]["pass"], true);
    assert_eq!(v["b_sequence"].as_array().unwrap().len(), 3);
}

#[test]
fn classify_van_der_pol_is_bound_limited() {
    let v = json_out(&["classify", "--x1", "x2 - (x1^3/3 - x1)", "--x2", "-x1", "--quiet"]);
    let c = &v["classification"];
    assert_eq!(c["status"], "bound_limited");
    assert_eq!(c["level_found"], Value::Null);
    assert_eq!(c["witness"], Value::Null);
    assert_eq!(c["exclusions"].as_array().unwrap().len(), 4);
    assert!(c["note"].as_str().unwrap().contains("bounds"));
}

#[test]
fn exit_codes() {
    assert_eq!(liouvik(&["classify", "--x1", "0", "--x2", "x2"]).status.code(), Some(2));
    assert_eq!(liouvik(&["classify", "--x1", "1 +", "--x2", "x2"]).status.code(), Some(1));
    assert_eq!(liouvik(&["classify", "--x1", "1/x2", "--x2", "x2"]).status.code(), Some(1));
    assert_eq!(liouvik(&["classify", "--x1", "1"]).status.code(), Some(1));
    assert_eq!(liouvik(&["--help"]).status.code(), Some(0));
}

#[test]
fn reports_are_byte_identical() {
    let args = ["classify", "--x1", "1", "--x2", "x1*x2 + 1", "--json", "--quiet"];
    let a = liouvik(&args);
    let b = liouvik(&args);
    let single = Command::new(env!("CARGO_BIN_EXE_liouvik"))
        .args(args)
        .env("LIOUVIK_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, single.stdout);
}

#[test]
fn darboux_lists_both_lines() {
    let v = json_out(&["darboux", "--x1", "1", "--x2", "x2^2 - 1", "--quiet"]);
    let pairs = v["pairs"].as_array().unwrap();
    let fs: Vec<&str> = pairs.iter().map(|p| p["f"].as_str().unwrap()).collect();
    assert_eq!(fs, ["x2 + 1", "x2 - 1"]);
    assert_eq!(v["complete"], true);
}

#[test]
fn check_and_certify() {
    let v = json_out(&["check", "--x1", "x2", "--x2", "-x1", "--start", "1,0.5", "--quiet"]);
    assert_eq!(v["numeric"]["pass"], true);
    let v = json_out(&["certify", "--x1", "1", "--x2", "x2^2 + x1", "--quiet"]);
    assert_eq!(v["level_found"], 3);
    assert_eq!(v["certificate"]["verified"], true);
}

#[test]
fn reduce_matches_prediction() {
    let v = json_out(&["reduce", "--x1", "x2", "--x2", "-x1 + x2^2", "--j", "3", "--quiet"]);
    assert_eq!(v["equal"], true);
    assert_eq!(v["coefficients"], serde_json::json!([3, 3, 1]));
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_liouvik"))
        .args(["classify", "--x1", "1", "--x2", "x2"])
        .env("LIOUVIK_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
