//! Result envelope: every output carries the parameter snapshot, tool
//! version, wall-clock time, and a content hash of the configuration that
//! produced it.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
pub struct ResultEnvelope<T: Serialize> {
    pub payload: T,
    pub params: switch_core::model::SwitchParams,
    pub tool_version: &'static str,
    pub wall_clock_seconds: f64,
    pub config_hash: String,
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Canonical JSON: object keys sorted recursively, so the hash is stable
/// under field reordering of the config source.
fn canonicalize(value: &serde_json::Value, out: &mut String) {
    match value {
        serde_json::Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).unwrap());
                out.push(':');
                canonicalize(&map[*k], out);
            }
            out.push('}');
        }
        serde_json::Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                canonicalize(item, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Content hash over the physics-relevant configuration and tool version.
pub fn config_hash(config: &RunConfig) -> String {
    #[derive(Serialize)]
    struct Keyed<'a> {
        params: &'a switch_core::model::SwitchParams,
        numerics: &'a crate::config::Numerics,
        truncation: &'a crate::config::Truncation,
        version: &'static str,
    }
    let value = serde_json::to_value(Keyed {
        params: &config.params,
        numerics: &config.numerics,
        truncation: &config.truncation,
        version: TOOL_VERSION,
    })
    .expect("config serializes");
    let mut canon = String::new();
    canonicalize(&value, &mut canon);
    let digest = Sha256::digest(canon.as_bytes());
    hex::encode(&digest[..16])
}

impl<T: Serialize> ResultEnvelope<T> {
    pub fn new(payload: T, config: &RunConfig, wall_clock_seconds: f64) -> Self {
        ResultEnvelope {
            payload,
            params: config.params.clone(),
            tool_version: TOOL_VERSION,
            wall_clock_seconds,
            config_hash: config_hash(config),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_stable_under_key_reordering() {
        let a: serde_json::Value =
            serde_json::from_str(r#"{"x": 1, "y": {"b": 2, "a": [1, 2]}}"#).unwrap();
        let b: serde_json::Value =
            serde_json::from_str(r#"{"y": {"a": [1, 2], "b": 2}, "x": 1}"#).unwrap();
        let mut ca = String::new();
        let mut cb = String::new();
        canonicalize(&a, &mut ca);
        canonicalize(&b, &mut cb);
        assert_eq!(ca, cb);
    }

    #[test]
    fn hash_changes_with_parameters() {
        let base = RunConfig::default();
        let mut tweaked = RunConfig::default();
        tweaked.params.hop *= 2.0;
        assert_ne!(config_hash(&base), config_hash(&tweaked));
        assert_eq!(config_hash(&base), config_hash(&RunConfig::default()));
    }
}
