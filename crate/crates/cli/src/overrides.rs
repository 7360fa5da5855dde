//! `--set key=value` overrides on JSON configs.
//!
//! Keys are dotted paths (`solver.ranks`, `channel.rbs`, `ranks.0`). Values
//! are parsed as JSON and fall back to a plain string, so `method=STD` and
//! `ranks=[2,8,8]` both work.

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::exit::{CliError, CliResult};

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Applies one `key=value` override in place.
pub fn apply_override(root: &mut Value, spec: &str) -> CliResult<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::config(format!("override {spec:?} is not key=value")))?;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::config(format!("override key {key:?} has an empty segment")));
    }
    let mut cur = root;
    for part in &parts {
        cur = match cur {
            Value::Array(items) => {
                let i: usize = part
                    .parse()
                    .map_err(|_| CliError::config(format!("{key:?}: {part:?} is not an array index")))?;
                let len = items.len();
                items
                    .get_mut(i)
                    .ok_or_else(|| CliError::config(format!("{key:?}: index {i} out of range for length {len}")))?
            }
            Value::Null => {
                *cur = Value::Object(Map::new());
                cur.as_object_mut().unwrap().entry(*part).or_insert(Value::Null)
            }
            Value::Object(map) => map.entry(*part).or_insert(Value::Null),
            _ => return Err(CliError::config(format!("{key:?}: cannot descend into {part:?}"))),
        };
    }
    *cur = parse_value(raw);
    Ok(())
}

/// Parses `text`, applies `overrides` in order and deserializes the result.
/// Returns the typed config and the effective JSON.
pub fn load_config<T: DeserializeOwned>(text: &str, overrides: &[String]) -> CliResult<(T, Value)> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))?;
    for o in overrides {
        apply_override(&mut value, o)?;
    }
    let typed = serde_json::from_value(value.clone()).map_err(|e| CliError::config(format!("config: {e}")))?;
    Ok((typed, value))
}
