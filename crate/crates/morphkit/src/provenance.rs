//! Provenance blocks attached to every artifact.

use std::collections::BTreeMap;

use morphkit_core::ShapeSample;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "morphkit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// Producing command, e.g. `distmat`.
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// SHA-256 of the inputs.
    pub inputs: String,
    /// Effective configuration after flags were applied.
    #[serde(default)]
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(stage: &str, inputs: String) -> Self {
        Provenance {
            tool: TOOL.into(),
            version: VERSION.into(),
            stage: stage.into(),
            method: None,
            params: BTreeMap::new(),
            seed: None,
            inputs,
            config: serde_json::Value::Null,
        }
    }

    pub fn with_method(mut self, method: &str, params: BTreeMap<String, String>) -> Self {
        self.method = Some(method.into());
        self.params = params;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_config(mut self, config: &impl Serialize) -> Self {
        self.config = serde_json::to_value(config).unwrap_or(serde_json::Value::Null);
        self
    }
}

/// Content hash of a shape set: ids, labels and exact coordinate bits.
pub fn hash_shapes(shapes: &[ShapeSample]) -> String {
    let mut h = Sha256::new();
    for s in shapes {
        h.update((s.id.len() as u64).to_le_bytes());
        h.update(s.id.as_bytes());
        match &s.label {
            Some(l) => {
                h.update([1]);
                h.update((l.len() as u64).to_le_bytes());
                h.update(l.as_bytes());
            }
            None => h.update([0]),
        }
        h.update((s.points.len() as u64).to_le_bytes());
        for p in &s.points {
            h.update(p.x.to_bits().to_le_bytes());
            h.update(p.y.to_bits().to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

pub fn hash_bytes(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    hex::encode(h.finalize())
}
