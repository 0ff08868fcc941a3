use std::collections::BTreeMap;
use std::path::Path;

use contagion_core::{ClearingResult, InjectionPlan};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::Command;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub config: Value,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub versions: BTreeMap<String, String>,
    /// Library operations this run went through.
    pub operations: Vec<String>,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<InjectionPlan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearing: Option<ClearingResult>,
    pub diagnostics: BTreeMap<String, Value>,
    /// Tables and network files written next to the record.
    pub files: Vec<String>,
}

impl ResultRecord {
    pub fn new(command: &Command) -> Self {
        let config = serde_json::to_value(command).expect("arguments serialize");
        let canonical = serde_json::to_string(&config).expect("values serialize");
        let versions = [
            ("contagion-cli", env!("CARGO_PKG_VERSION")),
            ("contagion-core", contagion_core::VERSION),
            ("contagion-optim", contagion_optim::VERSION),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        ResultRecord {
            command: command.name().to_string(),
            config,
            config_hash: hex::encode(Sha256::digest(canonical.as_bytes())),
            timestamp: None,
            versions,
            operations: Vec::new(),
            converged: true,
            plan: None,
            clearing: None,
            diagnostics: BTreeMap::new(),
            files: Vec::new(),
        }
    }

    pub fn op(&mut self, name: &str) {
        if !self.operations.iter().any(|o| o == name) {
            self.operations.push(name.to_string());
        }
    }

    pub fn note(&mut self, key: &str, value: impl Serialize) {
        self.diagnostics.insert(key.to_string(), serde_json::to_value(value).expect("diagnostics serialize"));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records serialize")
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, self.to_json() + "\n").map_err(|e| CliError::io(path, e))
    }
}
