use std::process::{Command, Output};

use serde_json::{json, Value};

fn mcnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcnet")).args(args).env_remove("MCAST_ORACLE_LIMIT").output().unwrap()
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn unsolvable_query_exits_one_with_refutation() {
    let out = mcnet(&["solvable", "--omega", "3", "--d", "5,5,10", "--q", "17"]);
    assert_eq!(code(&out), 1);
    let v = json_of(&out);
    assert_eq!(v["solvable"], false);
    assert_eq!(v["schema"], 1);
    let ds: Vec<u64> = v["refutation"].as_array().unwrap().iter().map(|c| c["d"].as_u64().unwrap()).collect();
    assert_eq!(ds, [1, 2, 4, 8, 16]);
}

#[test]
fn solvable_query_with_oracle_and_witness() {
    let out = mcnet(&["solvable", "--omega", "3", "--d", "3,3,3", "--q", "7", "--oracle", "--witness"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["solvable"], true);
    assert_eq!(v["oracle"], true);
    assert_eq!(v["verified"], true);
    assert_eq!(v["witness_divisor"], 3);
}

#[test]
fn field_range_of_the_symmetric_network() {
    let out = mcnet(&["qrange", "--omega", "3", "--d", "3,3,3"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!((v["q_min"].as_u64(), v["q_star_max"].as_u64()), (Some(7), Some(8)));
}

#[test]
fn synthesize_with_order_two() {
    let out = mcnet(&["synthesize", "--q", "7", "--qprime", "8", "--order", "2"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["omega"], 4);
    assert_eq!(v["d_tuple"], json!([2, 2, 2, 4]));
    assert_eq!(v["verified"], true);
}

#[test]
fn synthesize_without_valid_order_answers_no() {
    let out = mcnet(&["synthesize", "--q", "8", "--qprime", "9"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json_of(&out)["found"], false);
}

#[test]
fn criterion_exit_codes() {
    let yes = mcnet(&["criterion", "--q", "16", "--qprime", "17"]);
    assert_eq!(code(&yes), 0);
    assert_eq!(json_of(&yes)["valid_orders"], json!([5]));
    assert_eq!(code(&mcnet(&["criterion", "--q", "8", "--qprime", "7"])), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&mcnet(&["construct", "--omega", "3", "--d", "3,3,3", "--frobnicate"])), 2);
    assert_eq!(code(&mcnet(&["solvable", "--omega", "3", "--d", "3,3", "--q", "7"])), 2);
    assert_eq!(code(&mcnet(&["solvable", "--omega", "3", "--d", "3,3,3", "--q", "6"])), 2);
    assert_eq!(code(&mcnet(&[])), 2);
}

#[test]
fn capacity_errors_exit_three() {
    assert_eq!(code(&mcnet(&["cdbound", "--n", "20", "--cards", "3,3", "--brute"])), 3);
    let limited = Command::new(env!("CARGO_BIN_EXE_mcnet"))
        .args(["solvable", "--omega", "3", "--d", "3,3,3", "--q", "7", "--oracle"])
        .env("MCAST_ORACLE_LIMIT", "4")
        .output()
        .unwrap();
    assert_eq!(code(&limited), 3);
}

#[test]
fn exports_are_deterministic() {
    let args = ["construct", "--omega", "3", "--d", "3,3,3", "--export", "dot"];
    let a = mcnet(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, mcnet(&args).stdout);
    let dot = String::from_utf8(a.stdout).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("\"v_1\" -> ").count(), 3);
    let j = mcnet(&["construct-comb", "--n", "4", "--export", "json"]);
    assert_eq!(j.stdout, mcnet(&["construct-comb", "--n", "4"]).stdout);
    let v = json_of(&j);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["receivers"].as_array().unwrap().len(), 6);
}

#[test]
fn out_writes_file_and_keeps_stdout_empty() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nq.json");
    let out = mcnet(&["--out", path.to_str().unwrap(), "construct-nq", "--q", "5"]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["omega"], 3);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn cdbound_reports_bound_exact_and_brute() {
    let v = json_of(&mcnet(&["cdbound", "--n", "6", "--cards", "3,3,3", "--exact", "--brute"]));
    assert_eq!(v["cd_bound"], 3);
    assert_eq!(v["exact"]["size"], 3);
    assert_eq!(v["exact"]["divisor"], 3);
    assert_eq!(v["brute"], 3);
}

#[test]
fn stats_and_theorem4() {
    let v = json_of(&mcnet(&["stats", "--omega", "3", "--d", "3,3,3"]));
    assert_eq!(v["stats"]["omega"], 3);
    let v = json_of(&mcnet(&["--jobs", "1", "theorem4", "--k", "2"]));
    assert_eq!((v["q"].as_u64(), v["q_prime"].as_u64(), v["q_star_max"].as_u64()), (Some(16), Some(32), Some(32)));
    assert_eq!(code(&mcnet(&["stats"])), 2);
}

#[test]
fn crosschar_finds_a_small_pair() {
    let out = mcnet(&["crosschar", "--p", "2", "--pprime", "3", "--max-bits", "16"]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["hits"][0]["q"], 64);
    assert_eq!(v["hits"][0]["q_prime"], 81);
    assert_eq!(code(&mcnet(&["crosschar", "--p", "2", "--pprime", "3", "--max-bits", "5"])), 1);
}
