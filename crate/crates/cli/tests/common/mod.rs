#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qwiener"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn qwiener")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn schema_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schemas")
        .join(format!("{name}.v1.json"))
}

pub fn load_schema(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(schema_path(name)).unwrap()).unwrap()
}

fn type_matches(t: &str, v: &Value) -> bool {
    match t {
        "object" => v.is_object(),
        "array" => v.is_array(),
        "string" => v.is_string(),
        "boolean" => v.is_boolean(),
        "null" => v.is_null(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64(),
        other => panic!("unsupported type {other}"),
    }
}

/// Checks `value` against the subset of JSON Schema the shipped schemas use:
/// `type`, `const`, `enum`, `properties`, `required`,
/// `additionalProperties: false`, `items`, `minimum` and `oneOf`.
pub fn validate(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    let err = |msg: String| Err(format!("{path}: {msg}"));
    if let Some(t) = schema.get("type") {
        let ok = match t {
            Value::String(s) => type_matches(s, value),
            Value::Array(ts) => ts.iter().any(|t| type_matches(t.as_str().unwrap(), value)),
            _ => panic!("bad type in schema"),
        };
        if !ok {
            return err(format!("expected type {t}, got {value}"));
        }
    }
    if let Some(c) = schema.get("const") {
        if c != value {
            return err(format!("expected {c}, got {value}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(value) {
            return err(format!("{value} not in {options:?}"));
        }
    }
    if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
        if value.as_f64().is_some_and(|v| v < min) {
            return err(format!("{value} below minimum {min}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("oneOf") {
        let matches = options.iter().filter(|s| validate(s, value, path).is_ok()).count();
        if matches != 1 {
            return err(format!("{matches} oneOf branches match"));
        }
    }
    if let (Some(Value::Object(props)), Value::Object(obj)) = (schema.get("properties"), value) {
        for (k, sub) in props {
            if let Some(v) = obj.get(k) {
                validate(sub, v, &format!("{path}.{k}"))?;
            }
        }
        if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
            if let Some(extra) = obj.keys().find(|k| !props.contains_key(*k)) {
                return err(format!("unexpected key {extra}"));
            }
        }
    }
    if let (Some(Value::Array(req)), Value::Object(obj)) = (schema.get("required"), value) {
        for k in req {
            if !obj.contains_key(k.as_str().unwrap()) {
                return err(format!("missing key {k}"));
            }
        }
    }
    if let (Some(items), Value::Array(arr)) = (schema.get("items"), value) {
        for (i, v) in arr.iter().enumerate() {
            validate(items, v, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

pub fn assert_valid(name: &str, json_text: &str) -> Value {
    let value: Value = serde_json::from_str(json_text).expect("output is JSON");
    if let Err(e) = validate(&load_schema(name), &value, "$") {
        panic!("{name} output does not match its schema: {e}\n{json_text}");
    }
    value
}
