use std::process::Command;

use serde_json::Value;

fn refram(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_refram")).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = refram(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn keys(v: &Value) -> Vec<&str> {
    v.as_object().unwrap().keys().map(|k| k.as_str()).collect()
}

#[test]
fn break_reports_twisted_tower() {
    let v = json(&["break", "--p", "3", "--f", "2", "--b", "2", "--t", "1"]);
    assert_eq!(v["b_star_oracle"], 5);
    assert_eq!(v["b_star_formula"], 5);
    assert_eq!(v["agree"], true);
    assert_eq!(v["classification"], "NMRR");
    let mut k = keys(&v);
    k.sort();
    assert_eq!(k, ["agree", "b", "b_star_formula", "b_star_oracle", "classification", "omega", "orbit"]);
}

#[test]
fn break_classifies_smallest_tower() {
    let v = json(&["break", "--p", "2", "--f", "2", "--b", "1", "--t", "0"]);
    assert_eq!(v["classification"], "MRR");
    assert_eq!(v["orbit"].as_array().unwrap().len(), 2);
}

#[test]
fn invalid_specs_exit_2() {
    assert_eq!(refram(&["break", "--p", "3", "--f", "2", "--b", "3", "--t", "0"]).0, 2);
    assert_eq!(refram(&["break", "--p", "3"]).0, 2);
    assert_eq!(refram(&["break", "--p", "3", "--b", "2", "--omega", "[1"]).0, 2);
    assert_eq!(refram(&["break", "--p", "3", "--b", "2", "--poly", "x^2+1"]).0, 0);
    assert_eq!(refram(&["break", "--p", "3", "--b", "2", "--poly", "x^2+2"]).0, 2);
}

#[test]
fn enumerate_prints_one_value_per_line() {
    assert_eq!(refram(&["enumerate", "--p", "3", "--eK", "2", "--b", "2"]).1, "5\n6\n");
    assert_eq!(refram(&["enumerate", "--p", "3", "--eK", "4", "--b", "5"]).1, "8\n11\n");
    assert_eq!(refram(&["enumerate", "--p", "2", "--eK", "1", "--b", "1"]).1, "2\n");
    let v = json(&["enumerate", "--p", "3", "--eK", "2", "--b", "2", "--format", "json"]);
    assert_eq!(v, serde_json::json!([5, 6]));
}

#[test]
fn region_csv() {
    let (code, out, _) = refram(&["region", "--p", "3", "--eK", "2"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "b,t,b_star,region");
    assert!(lines.contains(&"2,0,6,max"));
    assert!(lines.contains(&"2,1,5,twist"));
}

#[test]
fn modules_report() {
    let v = json(&["modules", "--p", "3", "--f", "2", "--b", "2", "--t", "0", "--r", "1"]);
    assert_eq!(v["jordan"][2], 4);
    assert_eq!(v["ap_formula"], 4);
    assert_eq!(v["match"], true);
    assert_eq!(v["mrr_multiplicities"], serde_json::json!([0, 0, 0, 1, 0, 0, 0, 0, 1]));
    let mut k = keys(&v);
    k.sort();
    assert_eq!(k, ["ap_formula", "jordan", "match", "mrr_multiplicities", "note", "r", "spec"]);
}

#[test]
fn modules_reduces_r() {
    let a = refram(&["modules", "--p", "3", "--b", "2", "--r", "0"]);
    let b = refram(&["modules", "--p", "3", "--b", "2", "--r", "18"]);
    let c = refram(&["modules", "--p", "3", "--b", "2", "--r", "-18"]);
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn modules_outside_mrr_has_null_multiplicities() {
    let v = json(&["modules", "--p", "3", "--b", "2", "--t", "1", "--r", "2"]);
    assert_eq!(v["mrr_multiplicities"], Value::Null);
    assert!(v["note"].as_str().unwrap().contains("NMRR"));
    assert_eq!(v["jordan"][2], 4);
    assert_eq!(v["match"], true);
}

#[test]
fn low_precision_doubles_once() {
    let (code, _, err) = refram(&["modules", "--p", "3", "--b", "2", "--r", "1", "--precision", "18"]);
    assert_eq!(code, 0);
    assert!(err.contains("horizon 18 was insufficient; succeeded at horizon 36"), "{err}");
    // two doublings are not attempted
    assert_eq!(refram(&["modules", "--p", "3", "--b", "2", "--precision", "2"]).0, 3);
}

#[test]
fn verify_small_grid_and_fault_injection() {
    let (code, out, _) = refram(&["verify", "--primes", "2", "--ms", "1"]);
    assert_eq!(code, 0);
    assert!(out.ends_with("1 case, 1 passed, 0 failed\n"), "{out}");
    let (code, out, _) = refram(&["verify", "--primes", "2", "--ms", "1", "--inject-fault"]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL"));
}

#[test]
fn verify_empty_grid() {
    let (code, out, _) = refram(&["verify", "--b-max", "0"]);
    assert_eq!(code, 0);
    assert_eq!(out, "0 cases\n");
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--primes", "3", "--ms", "1", "--seed", "9", "--format", "csv"];
    assert_eq!(refram(&args), refram(&args));
    let args = ["break", "--p", "3", "--m", "2", "--b", "5", "--t", "4"];
    assert_eq!(refram(&args), refram(&args));
}

#[test]
fn config_file_overrides_flags_and_out_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out = dir.path().join("out.txt");
    std::fs::write(&cfg, "# smallest MRR tower\np = 2\nb = 1\n").unwrap();
    let (code, stdout, _) = refram(&[
        "enumerate",
        "--p",
        "3",
        "--b",
        "2",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "2\n");

    std::fs::write(&cfg, "p = 3\nbogus = 1\n").unwrap();
    assert_eq!(refram(&["enumerate", "--b", "2", "--config", cfg.to_str().unwrap()]).0, 2);
}
