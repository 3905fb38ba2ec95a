use std::process::{Command, Output};

use serde_json::Value;

fn cuspcount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspcount"))
        .args(args)
        .env_remove("CUSPCOUNT_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = cuspcount(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn schema() -> jsonschema::Validator {
    let text = include_str!("../schema/report.schema.json");
    let schema: Value = serde_json::from_str(text).unwrap();
    jsonschema::validator_for(&schema).expect("schema compiles")
}

const EVERY_COMMAND: &[&[&str]] = &[
    &["disc", "U(4)"],
    &["disc", "A(2) + U"],
    &["aut", "U(3)", "--list"],
    &["aut", "U(6)", "--method", "direct"],
    &["isogenus", "U(3)", "diag(6,-6)"],
    &["isogenus", "U(3)", "U(3)"],
    &["isotropic", "U + diag(-4)", "--bound", "2"],
    &["isotropic", "U(2)", "--div", "2"],
    &["genus", "--sign", "1,1", "--disc", "U(5)"],
    &["fm", "count", "U(12)"],
    &["fm", "count", "U(12)", "--strategy", "ur-closed-form"],
    &["fm", "twisted", "--d", "2", "U(2)"],
    &["fm", "elliptic", "U(6)"],
    &["fm", "elliptic", "--section", "U + diag(-6)"],
    &["fm", "crosscheck", "U + diag(-4)"],
    &["cusps", "--div", "3", "U(3)"],
    &["verify-ur", "--r", "3", "--max-r", "5"],
    &["transvect", "U + U", "--l", "1,0,0,0"],
    &["transvect", "U + U", "--l", "1,0,0,0", "--v", "0,0,1,1"],
    &["classify-i1", "U + diag(-2)", "--bound", "1"],
];

#[test]
fn every_report_matches_the_schema() {
    let validator = schema();
    for args in EVERY_COMMAND {
        let report = json(args);
        let errors: Vec<String> = validator
            .iter_errors(&report)
            .map(|e| format!("{} at {}", e, e.instance_path()))
            .collect();
        assert!(errors.is_empty(), "{args:?}: {errors:#?}");
        assert_eq!(report["schema_version"], "1.0");
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let validator = schema();
    let mut report = json(&["fm", "count", "U(3)"]);
    assert!(validator.is_valid(&report));
    report["result"]["route"] = "guesswork".into();
    assert!(!validator.is_valid(&report));
    let mut report = json(&["disc", "U(3)"]);
    report["result"]["extra"] = 1.into();
    assert!(!validator.is_valid(&report));
}

#[test]
fn json_output_is_deterministic() {
    for args in [
        &["aut", "U(12)", "--list"][..],
        &["verify-ur", "--r", "3", "--max-r", "8"],
        &["classify-i1", "U + diag(-2, -2)", "--bound", "2"],
    ] {
        let a = cuspcount(args);
        let b = cuspcount(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn table_output() {
    let out = cuspcount(&["fm", "count", "U(12)", "--format", "table"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("fm count\n"), "{text}");
    assert!(text.contains("value        4\n"), "{text}");
}

#[test]
fn values() {
    assert_eq!(json(&["fm", "count", "U(12)"])["result"]["value"], 4);
    assert_eq!(json(&["fm", "elliptic", "U(12)"])["result"]["value"], 8);
    assert_eq!(json(&["cusps", "--div", "2", "U(2)"])["result"]["value"], 2);
    assert_eq!(json(&["cusps", "--div", "4", "U(2)"])["result"]["value"], 0);
    assert_eq!(json(&["aut", "U(30)"])["result"]["order"], 64);
    let genus = json(&["genus", "--sign", "1,1", "--disc", "U(7)"]);
    assert_eq!(genus["result"]["count"], 1);
}

#[test]
fn root_sign_convention() {
    let neg = json(&["disc", "E8 + A(2)"]);
    assert_eq!(
        neg["result"]["lattice"]["signature"],
        serde_json::json!([0, 10])
    );
    let pos = json(&["disc", "E8 + A(2)", "--roots", "positive"]);
    assert_eq!(
        pos["result"]["lattice"]["signature"],
        serde_json::json!([10, 0])
    );
    assert_eq!(
        neg["result"]["form"]["order"],
        pos["result"]["form"]["order"]
    );
    // a Néron-Severi lattice must have signature (1, n)
    assert_eq!(
        cuspcount(&["fm", "count", "U + A(2)", "--roots", "positive"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn gram_files() {
    let dir = std::env::temp_dir().join(format!("cuspcount-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let good = dir.join("u6.json");
    std::fs::write(&good, r#"{"gram": [[0, 6], [6, 0]], "name": "U(6)"}"#).unwrap();
    let report = json(&["fm", "count", good.to_str().unwrap()]);
    assert_eq!(report["result"]["value"], 2);

    let odd = dir.join("odd.json");
    std::fs::write(&odd, r#"{"gram": [[1, 0], [0, -1]]}"#).unwrap();
    assert_eq!(
        cuspcount(&["disc", odd.to_str().unwrap()]).status.code(),
        Some(2)
    );

    let unknown = dir.join("unknown.json");
    std::fs::write(&unknown, r#"{"gram": [[0, 1], [1, 0]], "colour": 1}"#).unwrap();
    assert_eq!(
        cuspcount(&["disc", unknown.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn hodge_image_from_file() {
    let dir = std::env::temp_dir().join(format!("cuspcount-hodge-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    // the identity only: H is trivial, so every O(A) coset counts
    let path = dir.join("h.json");
    std::fs::write(&path, r#"{"generators": [[[1, 0], [0, 1]]]}"#).unwrap();
    let h = path.to_str().unwrap();
    let generic = json(&["cusps", "--div", "5", "U(5)"]);
    let trivial = json(&["cusps", "--div", "5", "U(5)", "--hodge", h]);
    assert_eq!(trivial["parameters"]["hodge_image_order"], 1);
    assert!(trivial["result"]["value"].as_u64() >= generic["result"]["value"].as_u64());

    std::fs::write(&path, r#"{"generators": [[[1, 1], [0, 1]]]}"#).unwrap();
    assert_eq!(
        cuspcount(&["cusps", "--div", "5", "U(5)", "--hodge", h])
            .status
            .code(),
        Some(2)
    );
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    let out = cuspcount(&["disc", "U + X(2)"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("byte 4"), "{err}");

    assert_eq!(cuspcount(&["disc", "U(0)"]).status.code(), Some(2));
    assert_eq!(cuspcount(&["verify-ur", "--r", "2"]).status.code(), Some(2));
    assert_eq!(
        cuspcount(&["fm", "count", "U(4)", "--strategy", "nope"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cuspcount(&["fm", "count", "U(2)", "--strategy", "ur-closed-form"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        cuspcount(&["aut", "U(101)", "--budget", "100"])
            .status
            .code(),
        Some(3)
    );
    let budget = Command::new(env!("CARGO_BIN_EXE_cuspcount"))
        .args(["aut", "U(5)"])
        .env("CUSPCOUNT_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(budget.status.code(), Some(3));
    // clap usage errors
    assert_eq!(cuspcount(&["frobnicate"]).status.code(), Some(2));
}
