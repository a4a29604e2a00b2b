use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avoidlab"))
        .args(args)
        .env_remove("AVOIDLAB_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(doc["schema"], 1);
    let manifest = &doc["manifest"];
    assert_eq!(manifest["command"], args[0]);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["wall_time"].is_number());
    doc
}

#[test]
fn mean_of_1243() {
    let doc = json(&["mean", "--sigma", "1 2 4 3"]);
    assert_eq!(doc["exact"], "5/128*sqrt(pi)");
    let decimal = doc["decimal"].as_str().unwrap();
    assert!(decimal.starts_with("0.069236478550996719816"), "{decimal}");
    assert_eq!(decimal.len(), 52);
}

#[test]
fn volume_of_231() {
    let doc = json(&["volume", "--sigma", "2 3 1"]);
    assert_eq!(doc["v"], "1/2");
    assert_eq!(doc["nu"], 1);
}

#[test]
fn count_21_in_321() {
    let doc = json(&["count", "--sigma", "2 1", "--pi", "3 2 1"]);
    assert_eq!(doc["count"], "3");
    let doc = json(&["count", "--sigma", "2 1", "--pi", "2 4 1 3", "--method", "block"]);
    assert_eq!(doc["count"], "3");
}

#[test]
fn other_exact_commands() {
    assert_eq!(json(&["wconst", "--sigma", "2 1"])["exact"], "1/2*sqrt(2)");
    assert_eq!(json(&["avoid", "--tau", "3 2 1", "--pi", "2 4 1 3"])["avoids"], true);
    let blocks = json(&["blocks", "--pi", "2 1 4 3 6 5"]);
    assert_eq!(blocks["count"], 3);
    assert_eq!(blocks["blocks"][2], serde_json::json!([2, 1]));
    let var = json(&["variance", "--sigma", "2 3 1"]);
    assert_eq!(var["exact"], "1/60");
    assert_eq!(var["second_moment"]["exact"], "19/240");
    assert_eq!(json(&["enumerate", "--n", "4"])["count"], 14);
    let dist = json(&["dist", "--sigma", "2 1", "--n", "3"]);
    assert_eq!(dist["mean"], "6/5");
    assert_eq!(dist["counts"]["2"], "2");
    let table = json(&["volume", "--table", "5"]);
    assert_eq!(table["blocks"].as_array().unwrap().len(), 1 + 2 + 5 + 14);
}

#[test]
fn single_method_mean() {
    let doc = json(&["mean", "--sigma", "2 3 1 4 6 7 5", "--method", "wick"]);
    assert_eq!(doc["exact"], "31/3360");
    assert_eq!(doc["methods"], serde_json::json!(["wick"]));
}

#[test]
fn seeded_commands_are_reproducible() {
    let a = json(&["mc", "--sigma", "2 1", "--samples", "300", "--grid", "128", "--seed", "5"]);
    let b = json(&["mc", "--sigma", "2 1", "--samples", "300", "--grid", "128", "--seed", "5", "--workers", "2"]);
    assert_eq!(a["mean"], b["mean"]);
    assert_eq!(a["stderr"], b["stderr"]);
    assert_eq!(a["seed"], 5);
    assert_eq!(a["manifest"]["seed"], 5);
    assert_eq!(a["N"], 300);
    assert_eq!(a["G"], 128);
    assert_eq!(a["closed_form"]["exact"], "1/4*sqrt(pi)");
    assert!(a["z_score"].is_number());

    let p = json(&["mc", "--sigma", "2 1", "--path", "permutation", "--n", "200", "--samples", "20", "--seed", "1"]);
    assert_eq!(p["n"], 200);
    assert!(p["mean"].as_f64().unwrap() > 0.2);

    let s1 = json(&["sample-perm", "--n", "12", "--count", "3", "--seed", "9"]);
    let s2 = json(&["sample-perm", "--n", "12", "--count", "3", "--seed", "9"]);
    assert_eq!(s1["permutations"], s2["permutations"]);
    let d = json(&["sample-dyck", "--n", "6", "--seed", "9"]);
    assert_eq!(d["paths"][0].as_str().unwrap().len(), 12);
}

#[test]
fn entropy_seed_is_echoed() {
    let doc = json(&["sample-perm", "--n", "5"]);
    assert!(doc["manifest"]["seed"].is_u64());
}

#[test]
fn unsupported_mean_exits_3_with_hint() {
    let out = run(&["mean", "--sigma", "2 1 3 5 6 4"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mc"), "{err}");
}

#[test]
fn caps_exit_3() {
    assert_eq!(run(&["enumerate", "--n", "15"]).status.code(), Some(3));
    let out = run(&["mc", "--sigma", "2 3 4 5 6 1", "--path", "permutation", "--n", "6000", "--samples", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["mean", "--sigma", "1 1"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--sigma", "2 1"]).status.code(), Some(2));
    assert_eq!(run(&["sample-perm", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn other_errors_exit_1() {
    let out = run(&["volume", "--sigma", "1 2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn csv_output() {
    let out = run(&["dist", "--sigma", "2 1", "--n", "3", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "# n=3,sigma=2 1,tau=3 2 1,total=5,mean=6/5,variance=14/25\nvalue,count\n0,1\n1,2\n2,2\n"
    );
    let out = run(&["mean", "--sigma", "2 1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# schema=1,manifest="));
    assert_eq!(lines.next(), Some("key,value"));
    assert!(text.contains("exact,1/4*sqrt(pi)"));
}

#[test]
fn out_file() {
    let path = std::env::temp_dir().join(format!("avoidlab-cli-{}.json", std::process::id()));
    let out = run(&["wconst", "--sigma", "2 3 1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(doc["exact"], "1/2");
}

#[test]
fn verify_exact_table() {
    let doc = json(&["verify"]);
    assert_eq!(doc["failed"], 0);
    assert!(doc["passed"].as_u64().unwrap() >= 40);
}

#[test]
fn verify_with_monte_carlo() {
    let doc = json(&["verify", "--mc", "--samples", "4000", "--grid", "512", "--seed", "3"]);
    assert_eq!(doc["failed"], 0, "{doc:#}");
}
