use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
        .display()
        .to_string()
}

fn annolog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_annolog")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn eval_prints_the_fixpoint() {
    let o = annolog(&["eval", "--mode", "unit", "--resolution", "10", &corpus("two_rule.alp")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines.contains(&"a -> [1,1]"), "{out}");
    assert!(lines.contains(&"b -> [0.8,1]"), "{out}");
    assert!(lines.contains(&"iterations: 3"), "{out}");
}

#[test]
fn eval_trace_lists_changes() {
    let o = annolog(&["eval", "--trace", "--mode", "unit", "--resolution", "10", &corpus("two_rule.alp")]);
    let out = stdout(&o);
    assert!(out.starts_with("iter 1: a -> [1,1]\n"), "{out}");
    assert!(out.contains("iter 2: b -> [0.8,1]"), "{out}");
}

#[test]
fn query_verdicts_and_exit_codes() {
    let p = corpus("two_rule.alp");
    let yes = annolog(&["query", "--mode", "unit", "--resolution", "10", &p, "b:[0.5,1]"]);
    assert_eq!(yes.status.code(), Some(0));
    assert_eq!(stdout(&yes), "ENTAILED\n");
    let no = annolog(&["query", "--mode", "unit", "--resolution", "10", &p, "b:[0.9,1]"]);
    assert_eq!(no.status.code(), Some(1));
    assert_eq!(stdout(&no), "NOT-ENTAILED\n");
}

#[test]
fn check_reports_witnesses() {
    let o = annolog(&["check", "--mode", "unit", "--resolution", "1", &corpus("conflicting_facts.alp")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("INCONSISTENT at iter 1: atom a: [0,0] vs [1,1]"), "{out}");

    let ok = annolog(&["check", &corpus("chain.alp")]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout(&ok), "CONSISTENT\n");
}

#[test]
fn check_json_is_parseable() {
    let o = annolog(&["check", "--json", &corpus("derived_conflict.alp")]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["consistent"], false);
    assert_eq!(v["incon_iteration"].as_u64().unwrap(), v["witness_iteration"].as_u64().unwrap() + 1);
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(annolog(&["eval", "/nonexistent.alp"]).status.code(), Some(2));
    assert_eq!(annolog(&["eval", "--mode", "signed", "--resolution", "4", &corpus("chain.alp")]).status.code(), Some(2));
    assert_eq!(annolog(&["eval", "--policy", "soft", &corpus("chain.alp")]).status.code(), Some(2));
    assert_eq!(annolog(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.alp");
    std::fs::write(&bad, "a : [1,1] <- \n").unwrap();
    assert_eq!(annolog(&["eval", bad.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn training_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("learned{run}.alp"));
        let o = annolog(&[
            "train",
            &corpus("mixed.alp"),
            &corpus("mixed.jsonl"),
            "--seed",
            "3",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((std::fs::read(&path).unwrap(), o.stdout));
    }
    assert_eq!(outputs[0], outputs[1]);
    let learned = String::from_utf8(outputs[0].0.clone()).unwrap();
    assert!(!learned.contains('?'), "{learned}");

    let learned_path = dir.path().join("learned0.alp");
    let o = annolog(&["check", learned_path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn training_json_history() {
    let o = annolog(&["train", "--json", "--policy", "penalty:0.5", &corpus("mixed.alp"), &corpus("mixed.jsonl")]);
    assert_eq!(o.status.code(), Some(0));
    let log = String::from_utf8(o.stderr).unwrap();
    let records: Vec<serde_json::Value> = log.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(records.len() >= 2);
    assert_eq!(records[0]["epoch"], 1);
}

#[test]
fn prune_drops_off_literals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pruned.alp");
    let o = annolog(&["prune", &corpus("mixed.alp"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("// annolog program (signed)"), "{text}");
    assert!(!text.contains('?'), "{text}");
}
