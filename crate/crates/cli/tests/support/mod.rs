#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use csmbench_cli::report::schemas;
use serde_json::Value;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

/// Runs the built binary with `args`.
pub fn csmbench(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_csmbench"))
        .args(args)
        .env_remove("CSMBENCH_PORT")
        .output()
        .expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn docs_api() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/api")
}

/// Validates `v` against the published schema `<name>.json`.
pub fn assert_schema(name: &str, v: &Value) {
    let path = docs_api().join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let schema: Value = serde_json::from_str(&text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(v).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}\n{v}");
}

/// Published schemas as generated from the report types.
pub fn generated_schemas() -> Vec<(&'static str, String)> {
    schemas()
        .into_iter()
        .map(|(n, s)| (n, serde_json::to_string_pretty(&s).unwrap() + "\n"))
        .collect()
}

pub fn model_file(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}
