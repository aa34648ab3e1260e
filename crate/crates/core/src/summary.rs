//! JSON run summaries.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io::write_atomic;

/// Everything needed to rerun a command bit-identically, plus its results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Absent only for deterministic commands.
    pub seed: Option<u64>,
    /// Effective parameters after merging config file and flags.
    pub config: serde_json::Value,
    pub results: serde_json::Value,
}

impl Summary {
    pub fn new(command: &str, seed: Option<u64>, config: serde_json::Value, results: serde_json::Value) -> Self {
        Self {
            tool: "bell-lab".into(),
            version: crate::VERSION.into(),
            command: command.into(),
            seed,
            config,
            results,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let s = Summary::new("simulate", Some(7), serde_json::json!({"n": 10}), serde_json::json!({"e": -1.0}));
        let back: Summary = serde_json::from_str(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.version, crate::VERSION);
    }
}
