mod common;

use std::fs;

use common::{code, copy_profile, grammarctl, root, stderr, stdout, strip_volatile};

fn expected_statuses() -> Vec<String> {
    fs::read_to_string(root().join("suites/phenomena.expect.tsv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(str::to_string)
        .collect()
}

#[test]
fn parse_phenomena_matches_expectation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o = grammarctl(&["parse", "grammars/esfrag", "suites/phenomena.tsv", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines, expected_statuses());
    assert_eq!(fs::read_to_string(out.join("items.jsonl")).unwrap().lines().count(), 40);

    // Existing output needs --force; a forced rerun gives the same records.
    let again = grammarctl(&["parse", "grammars/esfrag", "suites/phenomena.tsv", out.to_str().unwrap()]);
    assert_eq!(code(&again), 2);
    let before: Vec<Vec<u8>> =
        ["items.jsonl", "results.jsonl", "decisions.jsonl"].iter().map(|f| fs::read(out.join(f)).unwrap()).collect();
    let forced = grammarctl(&["parse", "grammars/esfrag", "suites/phenomena.tsv", out.to_str().unwrap(), "--force"]);
    assert_eq!(code(&forced), 0);
    let after: Vec<Vec<u8>> =
        ["items.jsonl", "results.jsonl", "decisions.jsonl"].iter().map(|f| fs::read(out.join(f)).unwrap()).collect();
    assert_eq!(before, after);
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("dup.tsv");
    fs::write(&suite, "1\t1\tSu amiga duerme.\n1\t1\tEl perro es pequeño.\n").unwrap();
    let out = dir.path().join("p");
    let o = grammarctl(&["parse", "grammars/esfrag", suite.to_str().unwrap(), out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("duplicate id 1"));
    let o = grammarctl(&["parse", "grammars/nope", "suites/phenomena.tsv", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let o = grammarctl(&[
        "parse",
        "grammars/esfrag",
        "suites/phenomena.tsv",
        out.to_str().unwrap(),
        "--option",
        "bogus=on",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn one_edge_limit_hits_every_lexically_covered_item() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let o =
        grammarctl(&["parse", "grammars/esfrag", "suites/phenomena.tsv", out.to_str().unwrap(), "--max-edges", "1"]);
    assert_eq!(code(&o), 0);
    for line in stdout(&o).lines() {
        let status = line.split('\t').nth(1).unwrap();
        assert!(status == "resource-limit" || status == "lexical-gap", "{line}");
    }
    assert!(stdout(&o).contains("resource-limit"));
}

#[test]
fn compare_exit_codes() {
    let gold = "profiles/phenomena-gold";
    let o = grammarctl(&["treebank", "compare", gold, gold]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let dir = tempfile::tempdir().unwrap();
    let off = dir.path().join("off");
    let p = grammarctl(&[
        "parse",
        "grammars/esfrag",
        "suites/phenomena.tsv",
        off.to_str().unwrap(),
        "--option",
        "depictive=off",
    ]);
    assert_eq!(code(&p), 0);
    let report = dir.path().join("report.json");
    let o = grammarctl(&["treebank", "compare", gold, off.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("gold-lost: 2 6 38 40"), "{}", stderr(&o));
    let expect = fs::read_to_string(root().join("suites/regression.expect.tsv")).unwrap();
    let expect: Vec<&str> = expect.lines().filter(|l| !l.starts_with('#')).collect();
    let got = stdout(&o);
    let got: Vec<&str> = got.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(got, expect);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["counts"]["gold-lost"], 4);

    let o = grammarctl(&["treebank", "compare", gold, "profiles/missing"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn decide_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let p = copy_profile("learner-gold", dir.path());
    let ps = p.to_str().unwrap();
    let decisions = p.join("decisions.jsonl");
    let before = fs::read_to_string(&decisions).unwrap();
    let o = grammarctl(&["treebank", "decide", ps, "--item", "11", "--reject", "--annotator", "ana"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let after = fs::read_to_string(&decisions).unwrap();
    let added = &after[before.len()..];
    assert_eq!(added.lines().count(), 1);
    assert_eq!(strip_volatile(added.trim()), serde_json::json!({"item-id": 11, "verdict": "reject-all"}));
    // Out of range and unknown items fail without writing.
    assert_eq!(code(&grammarctl(&["treebank", "decide", ps, "--item", "1", "--gold", "3"])), 2);
    assert_eq!(code(&grammarctl(&["treebank", "decide", ps, "--item", "99", "--reject"])), 2);
    assert_eq!(fs::read_to_string(&decisions).unwrap(), after);
    // Exactly one of --gold and --reject.
    assert_eq!(code(&grammarctl(&["treebank", "decide", ps, "--item", "1"])), 2);
    assert_eq!(code(&grammarctl(&["treebank", "decide", ps, "--item", "1", "--gold", "0", "--reject"])), 2);
}

#[test]
fn metrics_of_learner_profile() {
    let o = grammarctl(&["metrics", "profiles/learner-gold"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\ncoverage 0.92  accuracy 0.77  overgeneration 0.57\n"), "{}", stdout(&o));
    let o = grammarctl(&["metrics", "profiles/learner-gold", "--format", "records"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).lines().all(|l| serde_json::from_str::<serde_json::Value>(l).is_ok()));
    assert_eq!(code(&grammarctl(&["metrics", "profiles/learner-gold", "--format", "xml"])), 2);
}

#[test]
fn validate_analyze_and_dmrs() {
    let o = grammarctl(&["validate", "grammars/esfrag"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("options depictive=on querer_ldd=off"));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("g");
    fs::create_dir(&bad).unwrap();
    let o = grammarctl(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("missing file"));

    let o = grammarctl(&["analyze", "grammars/esfrag", "Mis abuelos son famosos."]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("son\tser/V-IND-3P"));

    let mrs = root().join("crates/core/tests/data/mis-abuelos-son-famosos.mrs");
    let o = grammarctl(&["mrs", "dmrs", mrs.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("node ")).count(), 4);
    let broken = dir.path().join("bad.mrs");
    fs::write(&broken, "[ TOP: h0 INDEX: e1 RELS: < [ _a LBL: h0 ARG0: e1 ] > HCONS: < h0 qeq h9 > ]\n").unwrap();
    let o = grammarctl(&["mrs", "dmrs", broken.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("dangling qeq lo h9"));
}
