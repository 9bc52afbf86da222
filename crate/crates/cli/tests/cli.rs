use std::fs;
use std::process::{Command, Output};

fn flowtwist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowtwist"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn apply_prints_the_final_flow() {
    let out = flowtwist(&["apply", "--word", "2001", "--element", "cbcabb"]);
    assert_eq!(out.status.code(), Some(0));
    let json = stdout_json(&out);
    assert_eq!(json["word"], "2");
    assert_eq!(json["span"], "4/1");
    assert_eq!(json["pieces"][0][0], 2);
}

#[test]
fn engines_agree_on_apply() {
    let rules = flowtwist(&[
        "apply",
        "--word",
        "2110",
        "--element",
        "abcab",
        "--engine",
        "rule-table",
    ]);
    let bij = flowtwist(&[
        "apply",
        "--word",
        "2110~",
        "--element",
        "abcab",
        "--engine",
        "bijection",
    ]);
    assert_eq!(
        rules.status.code(),
        Some(2),
        "2110 is not a legal periodic word"
    );
    assert_eq!(bij.status.code(), Some(0));
    let a = flowtwist(&[
        "apply",
        "--word",
        "21101",
        "--element",
        "abcab",
        "--engine",
        "rule-table",
    ]);
    let b = flowtwist(&[
        "apply",
        "--word",
        "21101",
        "--element",
        "abcab",
        "--engine",
        "bijection",
    ]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn default_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = flowtwist(&[
        "verify",
        "--max-len",
        "11",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["verdict"], "PASS");
    assert_eq!(json["reports"].as_array().unwrap().len(), 9);
    let first = &json["reports"][0];
    for key in [
        "relation",
        "engine",
        "verdict",
        "stabilization_length",
        "read_depth",
        "witnesses",
    ] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(first["engine"], "rule-table");
}

#[test]
fn broken_c_fails_with_witness() {
    let out = flowtwist(&["verify", "--generator-c", "c_broken", "--max-len", "6"]);
    assert_eq!(out.status.code(), Some(1));
    let json = stdout_json(&out);
    let cc = &json["reports"][2];
    assert_eq!(cc["relation"], "cc");
    assert_eq!(cc["verdict"], "FAIL");
    assert_eq!(cc["witnesses"][0]["word"], "211");
}

#[test]
fn reports_are_byte_stable() {
    let args = [
        "verify",
        "--relations",
        "default",
        "--max-len",
        "5",
        "--engine",
        "bijection",
    ];
    let a = flowtwist(&args);
    let b = flowtwist(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn relation_files() {
    let dir = tempfile::tempdir().unwrap();
    let rels = dir.path().join("rels.txt");
    fs::write(&rels, "# two orders\naa\nab\n").unwrap();
    let out = flowtwist(&[
        "verify",
        "--relations",
        rels.to_str().unwrap(),
        "--max-len",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let json = stdout_json(&out);
    assert_eq!(json["reports"][0]["verdict"], "PASS");
    assert_eq!(json["reports"][1]["verdict"], "FAIL");

    fs::write(&rels, "abx\n").unwrap();
    let out = flowtwist(&["verify", "--relations", rels.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_and_compile() {
    let out = flowtwist(&["validate", "--builtin", "b"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["ok"], true);

    let dir = tempfile::tempdir().unwrap();
    let bij = dir.path().join("swap.txt");
    fs::write(&bij, "# swap the first bit\n0 -> 1\n1 -> 0\n").unwrap();
    let rule = dir.path().join("swap.rule");
    let out = flowtwist(&[
        "compile",
        "--bijection",
        bij.to_str().unwrap(),
        "--out",
        rule.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = flowtwist(&["validate", "--rule", rule.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let broken = dir.path().join("broken.rule");
    fs::write(&broken, "AB(C):C\n(2)2:201\n").unwrap();
    let out = flowtwist(&["validate", "--rule", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!stdout_json(&out)["witnesses"]
        .as_array()
        .unwrap()
        .is_empty());

    fs::write(&bij, "0 -> 1\n").unwrap();
    let out = flowtwist(&["compile", "--bijection", bij.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn render_and_suite() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("aa.svg");
    let out = flowtwist(&[
        "render",
        "--word",
        "2",
        "--element",
        "aa",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["rows"], 3);
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<?xml"));

    let suite = dir.path().join("suite");
    let out = flowtwist(&["suite", "--out", suite.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.contains("112 diagrams, 57 intra-tile discontinuities"),
        "{text}"
    );
    assert_eq!(fs::read_dir(&suite).unwrap().count(), 112);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        flowtwist(&["verify", "--engine", "nope"]).status.code(),
        Some(2)
    );
    assert_eq!(
        flowtwist(&["apply", "--word", "12", "--element", "a"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(flowtwist(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        flowtwist(&["verify", "--max-len", "0"]).status.code(),
        Some(2)
    );
}

#[test]
fn thread_cap_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_flowtwist"))
        .args(["verify", "--max-len", "5"])
        .env("FLOWTWIST_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}
