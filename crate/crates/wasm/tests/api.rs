//! Host-side tests of the browser bindings. The exported functions are plain
//! string-in/string-out Rust functions, so they run without a browser; the
//! `report` field of every success payload must validate against the same
//! JSON schemas the CLI ships.

use jsonschema::JSONSchema;
use serde_json::Value;

use uom_wasm::{canonical_info, check_matrix, equivalence};

fn schema(name: &str) -> JSONSchema {
    let path = format!(
        "{}/../cli/schemas/{name}.schema.json",
        env!("CARGO_MANIFEST_DIR")
    );
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let doc: Value = serde_json::from_str(&text).unwrap();
    JSONSchema::compile(&doc).unwrap()
}

fn fixture(name: &str) -> String {
    let path = format!("{}/../../data/{name}.txt", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

/// Parses a binding's output and, when it is a success payload, validates the
/// `report` field against the named CLI schema.
fn parsed(out: &str, schema_name: &str) -> Value {
    let value: Value = serde_json::from_str(out).expect("bindings return JSON");
    if value.get("error").is_none() {
        let report = &value["report"];
        let compiled = schema(schema_name);
        assert!(
            compiled.validate(report).is_ok(),
            "{schema_name} schema rejects {report}"
        );
        assert!(value["text"].is_string(), "missing text rendering: {value}");
    }
    value
}

#[test]
fn check_reports_the_known_extension() {
    let value = parsed(&check_matrix(&fixture("eq3_Y")), "check");
    assert_eq!(value["report"]["orthogonal"], true);
    assert_eq!(value["report"]["uom"], false);
    assert_eq!(value["report"]["extension"], "a c' e");
    assert!(value["text"]
        .as_str()
        .unwrap()
        .contains("extension: a c' e"));
}

#[test]
fn check_confirms_each_bundled_matrix() {
    for name in ["eq1_1", "eq1_2", "eq1_3", "eq1_4"] {
        let value = parsed(&check_matrix(&fixture(name)), "check");
        assert_eq!(value["report"]["uom"], true, "{name}: {value}");
        assert_eq!(value["report"]["extension"], Value::Null, "{name}");
    }
}

#[test]
fn canonical_info_is_stable_on_its_own_output() {
    let first = parsed(&canonical_info(&fixture("eq1_4")), "canon");
    let canonical = first["report"]["canonical"].as_str().unwrap();
    let second = parsed(&canonical_info(canonical), "canon");
    assert_eq!(first["report"]["key"], second["report"]["key"]);
    assert_eq!(second["report"]["canonical"], canonical);
}

#[test]
fn equivalence_sees_through_relabelings() {
    // Permute the rows and flip the parity of one column-1 letter: both are
    // relabelings, so the verdict must be "equivalent" with equal keys.
    let x = "ace ADf bCF BdE";
    for variant in ["BdE bCF ADf ace", "Ace aDf bCF BdE"] {
        let value = parsed(&equivalence(x, variant), "equiv");
        assert_eq!(value["report"]["equivalent"], true, "{variant}");
        assert_eq!(value["report"]["left_key"], value["report"]["right_key"]);
        assert_eq!(value["text"], "equivalent");
    }
    // Identifying the two column-3 letters changes the class.
    let value = parsed(&equivalence(x, &fixture("eq3_Y")), "equiv");
    assert_eq!(value["report"]["equivalent"], false);
    assert_eq!(value["text"], "inequivalent");
}

#[test]
fn malformed_input_yields_an_error_object() {
    for out in [
        check_matrix("ab a"),
        canonical_info(""),
        equivalence("ab a", "a A"),
        equivalence("a A", "ab a"),
    ] {
        let value: Value = serde_json::from_str(&out).unwrap();
        let message = value["error"].as_str().unwrap_or_else(|| panic!("{value}"));
        assert!(!message.is_empty());
        assert!(value.get("report").is_none());
    }
    let sided: Value = serde_json::from_str(&equivalence("ab a", "a A")).unwrap();
    assert!(sided["error"].as_str().unwrap().starts_with("left matrix:"));
}
