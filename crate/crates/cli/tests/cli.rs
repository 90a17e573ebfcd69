use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hzsplit")).args(args).output().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn schema(name: &str) -> Value {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(format!("{name}.v1.json"));
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

/// Required keys at the top level and their JSON types, as declared by the schema.
fn conforms(out: &Value, s: &Value) {
    let props = s["properties"].as_object().unwrap();
    for key in s["required"].as_array().unwrap() {
        let key = key.as_str().unwrap();
        let v = out.get(key).unwrap_or_else(|| panic!("missing `{key}`"));
        if let Some(c) = props[key].get("const") {
            assert_eq!(v, c, "{key}");
        }
        let types: Vec<&str> = match &props[key]["type"] {
            Value::String(t) => vec![t.as_str()],
            Value::Array(ts) => ts.iter().map(|t| t.as_str().unwrap()).collect(),
            _ => continue,
        };
        let actual = match v {
            Value::Null => "null",
            Value::Bool(_) => "boolean",
            Value::Number(n) if n.is_i64() || n.is_u64() => "integer",
            Value::Number(_) => "number",
            Value::String(_) => "string",
            Value::Array(_) => "array",
            Value::Object(_) => "object",
        };
        assert!(types.contains(&actual), "`{key}` is {actual}, schema says {types:?}");
    }
}

#[test]
fn compute_prints_value_and_generator() {
    assert_eq!(stdout(&["compute", "--group", "D6", "--grading", "1+s-g"]), "Z, generator u_{γ-σ}\n");
    assert_eq!(stdout(&["compute", "--group", "A5", "--grading", "0"]), "Z\n");
    assert_eq!(stdout(&["compute", "--group", "K4", "--grading", "-3 + V"]), "Z, generator (y_1y_2y_3)^{-1}\n");
    assert!(stdout(&["compute", "--group", "C2", "--grading", " - 2 * s "]).starts_with("Z/2"));
}

#[test]
fn compute_localizes() {
    let full = stdout(&["compute", "--group", "D6", "--grading", "-s", "--json"]);
    let v: Value = serde_json::from_str(&full).unwrap();
    assert_eq!(v["value"]["invariant_factors"], serde_json::json!(["2"]));
    assert_eq!(stdout(&["compute", "--group", "D6", "--grading", "-s", "--prime", "3"]), "0\n");
}

#[test]
fn bad_input_fails() {
    for args in [
        vec!["compute", "--group", "D6", "--grading", "1+x"],
        vec!["compute", "--group", "Q8", "--grading", "0"],
        vec!["compute", "--group", "D6", "--grading", "0", "--prime", "5"],
        vec!["cellhom", "--catalog", "K4", "--n", "2", "--coeff", "F4"],
        vec!["frobnicate"],
    ] {
        let o = run(&args);
        assert!(!o.status.success(), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn json_outputs_follow_schemas() {
    let cases: [(&str, Vec<&str>); 6] = [
        ("compute", vec!["compute", "--group", "D10", "--grading", "2-2g"]),
        ("mackey", vec!["mackey", "--group", "D6", "--grading", "1+s-g"]),
        ("cellhom", vec!["cellhom", "--catalog", "C3", "--n", "2", "--emit-complex"]),
        ("families", vec!["families", "--group", "K4"]),
        ("marks", vec!["marks", "--group", "A4"]),
        ("verify", vec!["verify"]),
    ];
    for (name, mut args) in cases {
        args.push("--json");
        let v: Value = serde_json::from_str(&stdout(&args)).unwrap();
        conforms(&v, &schema(name));
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["mackey", "--group", "A4", "--grading", "1 - V3", "--json"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn mackey_text_diagram() {
    let text = stdout(&["mackey", "--group", "K4", "--grading", "V - 3"]);
    assert!(text.contains("K_4 -> e      res [4]  tr [1]"), "{text}");
}

#[test]
fn cellhom_lists_degrees() {
    let text = stdout(&["cellhom", "--catalog", "K4", "--n", "2", "--coeff", "F2"]);
    let dims: Vec<&str> = text.lines().map(|l| l.split_whitespace().last().unwrap()).collect();
    assert_eq!(dims, ["(F2)^1", "(F2)^3", "(F2)^5", "(F2)^4", "(F2)^3", "(F2)^2", "(F2)^1"]);
    let z = stdout(&["cellhom", "--catalog", "C2", "--n", "2"]);
    assert_eq!(z.lines().last().unwrap(), "H_2   Z");
}

#[test]
fn marks_table() {
    let text = stdout(&["marks", "--group", "C2"]);
    assert_eq!(text, "       e C_2\n  e    2   1\nC_2    0   1\n");
}

#[test]
fn families_report_primes() {
    let v: Value = serde_json::from_str(&stdout(&["families", "--group", "D6", "--json"])).unwrap();
    let fams = v["families"].as_array().unwrap();
    assert!(fams.iter().all(|f| f["error"].is_null() && f["used_primes"] == f["required_primes"]));
}

#[test]
fn verify_default_suite_passes() {
    let o = run(&["verify", "--suite", "paper"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains(" 0 failed"));
}
