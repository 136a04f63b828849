use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Number, Value};
use slocc_core::io::format_sig;

/// Text to print plus whether every check passed.
pub struct Output {
    pub text: String,
    pub passed: bool,
}

impl Output {
    pub fn json(value: Value, passed: bool) -> Self {
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        Self { text, passed }
    }
}

/// Rounds every float to ten significant digits, leaving the keys in `keep` untouched.
pub fn round_floats(value: &mut Value, keep: &[&str]) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64");
            let r: f64 = format_sig(x).parse().unwrap_or(x);
            if let Some(num) = Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| round_floats(v, keep)),
        Value::Object(map) => {
            for (k, v) in map.iter_mut() {
                if !keep.contains(&k.as_str()) {
                    round_floats(v, keep);
                }
            }
        }
        _ => {}
    }
}

pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}
