//! Machine-readable check records shared by every module.

use serde::{Deserialize, Serialize};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// One pass/fail check: `{name, inputs, value, tolerance, pass}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub inputs: serde_json::Value,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Record that passes when `value < tolerance`.
    pub fn below(name: impl Into<String>, inputs: serde_json::Value, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            inputs,
            value,
            tolerance,
            pass: value.is_finite() && value < tolerance,
        }
    }

    /// Record that passes when `value >= threshold`.
    pub fn at_least(name: impl Into<String>, inputs: serde_json::Value, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            inputs,
            value,
            tolerance: threshold,
            pass: value >= threshold,
        }
    }
}
