//! End-to-end tests of the binary: exit codes, worked values, certificate
//! determinism.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/{name}"))
}

fn jacobel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jacobel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 stdout")
}

fn temp_doc(contents: &str) -> tempfile::NamedTempFile {
    let mut file = tempfile::NamedTempFile::new().expect("temp file");
    file.write_all(contents.as_bytes()).expect("write");
    file
}

#[test]
fn validate_banana() {
    let out = jacobel(&["validate", fixture("banana.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("2 components, 2 nodes (2 reducible, 0 irreducible)"));
    assert!(text.contains("genus       : 1"));
}

#[test]
fn validate_rejects_dangling_node() {
    let doc = temp_doc(
        r#"{
            "components": [{ "name": "v1", "genus": 0 }],
            "nodes": [{ "name": "n1", "ends": ["v1", "ghost"] }],
            "polarization": { "rank": 1, "multidegree": { "v1": 0 } },
            "line_bundle": { "v1": 1 },
            "marked_point": "v1"
        }"#,
    );
    let out = jacobel(&["validate", doc.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_warns_on_degree_mismatch_but_succeeds() {
    let doc = temp_doc(
        r#"{
            "components": [{ "name": "v", "genus": 2 }],
            "polarization": { "rank": 1, "multidegree": { "v": 0 } },
            "line_bundle": { "v": 5 },
            "marked_point": "v"
        }"#,
    );
    let out = jacobel(&["validate", doc.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("warning"));
    // the abel pipeline needs the matching degree
    let out = jacobel(&["abel", doc.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stability_default_class_is_quasistable() {
    let out = jacobel(&["stability", fixture("banana.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict: stable"));
}

#[test]
fn stability_override_and_expectations() {
    let banana = fixture("banana.json");
    let path = banana.to_str().unwrap();
    let out = jacobel(&["stability", path, "--multidegree", "2,-2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("verdict: not-semistable"));
    assert!(text.contains("witness: {v2} with beta -1"));

    let out = jacobel(&[
        "stability",
        path,
        "--multidegree",
        "2,-2",
        "--expect",
        "quasistable",
    ]);
    assert_eq!(out.status.code(), Some(1));

    let out = jacobel(&["stability", path, "--multidegree", "1,0,0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn abel_banana_worked_record() {
    let out = jacobel(&["abel", fixture("banana.json").to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    let records = cert["results"]["records"].as_array().unwrap();
    assert_eq!(records.len(), 4);
    let n1 = &records[2];
    assert_eq!(n1["stratum"], "n1");
    assert_eq!(n1["fiber"], "C(1)");
    assert_eq!(n1["limit"], serde_json::json!([0, -1, 1, 0]));
    assert_eq!(n1["corrected"], serde_json::json!([1, 0, -1, 0]));
    assert_eq!(n1["admissibility"], "negatively-admissible");
    assert_eq!(n1["pushforward"]["multidegree"], serde_json::json!([1, 0]));
    assert_eq!(
        n1["pushforward"]["noninvertible_nodes"],
        serde_json::json!(["n1"])
    );
    assert_eq!(n1["pushforward"]["total"], 0);
    assert_eq!(n1["stability"]["verdict"], "P-quasistable");
}

#[test]
fn abel_loop_worked_record() {
    let out = jacobel(&["abel", fixture("loop.json").to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    let records = cert["results"]["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    let node = &records[1];
    assert_eq!(node["fiber"], "C_R");
    assert_eq!(node["pushforward"]["multidegree"], serde_json::json!([2]));
    assert_eq!(
        node["pushforward"]["noninvertible_nodes"],
        serde_json::json!(["R"])
    );
    assert_eq!(node["pushforward"]["total"], 1);
}

#[test]
fn abel_all_choices_and_oracle() {
    for name in ["triangle.json", "theta.json", "chain4.json", "mixed.json"] {
        let out = jacobel(&[
            "abel",
            fixture(name).to_str().unwrap(),
            "--all-choices",
            "--oracle",
        ]);
        assert_eq!(out.status.code(), Some(0), "{name} failed");
        assert!(stdout(&out).contains("pushforwards identical"));
    }
}

#[test]
fn abel_respects_document_matchings() {
    let doc = temp_doc(
        r#"{
            "components": [
                { "name": "v1", "genus": 0 },
                { "name": "v2", "genus": 0 },
                { "name": "v3", "genus": 0 }
            ],
            "nodes": [
                { "name": "n12", "ends": ["v1", "v2"] },
                { "name": "n13", "ends": ["v1", "v3"] },
                { "name": "n23", "ends": ["v2", "v3"] }
            ],
            "polarization": { "rank": 1, "multidegree": { "v1": 0, "v2": 0, "v3": 0 } },
            "line_bundle": { "v1": 0, "v2": 0, "v3": 1 },
            "marked_point": "v1",
            "desingularization": [
                { "pair": ["n12", "n23"], "matching": "parallel" }
            ]
        }"#,
    );
    let out = jacobel(&["abel", doc.path().to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    // the limit over n12 depends on the matching, the pushforward does not
    let records = cert["results"]["records"].as_array().unwrap();
    let n12 = &records[3];
    assert_eq!(n12["stratum"], "n12");
    assert_eq!(n12["limit"], serde_json::json!([1, 0, 0, 0, 0, -1]));
    assert_eq!(n12["pushforward"]["multidegree"], serde_json::json!([1, 0, 0]));
    assert_eq!(
        n12["pushforward"]["noninvertible_nodes"],
        serde_json::json!(["n23"])
    );
}

#[test]
fn diagonal_matching_pair_rejected() {
    let doc = temp_doc(
        r#"{
            "components": [
                { "name": "v1", "genus": 0 },
                { "name": "v2", "genus": 0 }
            ],
            "nodes": [
                { "name": "n1", "ends": ["v1", "v2"] },
                { "name": "n2", "ends": ["v1", "v2"] }
            ],
            "polarization": { "rank": 1, "multidegree": { "v1": 0, "v2": 0 } },
            "line_bundle": { "v1": 1, "v2": 0 },
            "marked_point": "v1",
            "desingularization": [
                { "pair": ["n1", "n1"], "matching": "parallel" }
            ]
        }"#,
    );
    let out = jacobel(&["abel", doc.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn enumerate_banana_sets() {
    let out = jacobel(&[
        "enumerate",
        fixture("banana.json").to_str().unwrap(),
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    assert_eq!(
        cert["results"]["semistable"],
        serde_json::json!([[-1, 1], [0, 0], [1, -1]])
    );
    assert_eq!(
        cert["results"]["quasistable"],
        serde_json::json!([[0, 0], [1, -1]])
    );
    assert_eq!(cert["results"]["twister_classes"], 2);
}

#[test]
fn certificates_are_byte_identical() {
    let banana = fixture("banana.json");
    let path = banana.to_str().unwrap();
    let first = jacobel(&["abel", path, "--json"]);
    let second = jacobel(&["abel", path, "--json"]);
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn selftest_is_deterministic_and_passes() {
    let first = jacobel(&["selftest", "--json", "--seed", "7"]);
    assert_eq!(first.status.code(), Some(0));
    let second = jacobel(&["selftest", "--json", "--seed", "7"]);
    assert_eq!(first.stdout, second.stdout, "certificates differ");
    let cert: serde_json::Value = serde_json::from_str(&stdout(&first)).expect("json");
    assert_eq!(cert["results"]["passed"], true);
    assert_eq!(cert["results"]["criteria"].as_array().unwrap().len(), 9);
}

#[test]
fn twister_certificate_reports_differences() {
    let out = jacobel(&[
        "twister",
        fixture("triangle.json").to_str().unwrap(),
        "--json",
        "--oracle",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json");
    let per_component = cert["results"]["per_component"].as_array().unwrap();
    assert_eq!(per_component.len(), 3);
    assert!(per_component
        .iter()
        .all(|t| t["oracle_agrees"] == serde_json::json!(true)));
    let differences = cert["results"]["differences"].as_array().unwrap();
    assert_eq!(differences.len(), 6);
}
