//! Plain `key = value` experiment files.
//!
//! ```text
//! # channel
//! command = optimize
//! snr-db = 0,5,10
//! diversity = 5
//! ```
//!
//! Keys are long flag names (underscores are accepted for dashes). The
//! optional `command` key names the subcommand used when none is given.

use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub command: Option<String>,
    pub values: BTreeMap<String, String>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.starts_with(|c: char| c.is_ascii_lowercase())
        && key.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("config line {}: expected key = value", no + 1)))?;
            let key = key.trim().to_ascii_lowercase().replace('_', "-");
            let value = value.trim().to_string();
            if !valid_key(&key) {
                return Err(Error::Domain(format!("config line {}: bad key '{key}'", no + 1)));
            }
            if key == "command" {
                if cfg.command.replace(value).is_some() {
                    return Err(Error::Domain(format!("config line {}: duplicate command", no + 1)));
                }
            } else if cfg.values.insert(key.clone(), value).is_some() {
                return Err(Error::Domain(format!("config line {}: duplicate key '{key}'", no + 1)));
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> String {
        let mut out = String::new();
        if let Some(c) = &self.command {
            out.push_str(&format!("command = {c}\n"));
        }
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// The entries as `--key value` pairs (a bare `--key` for empty values).
    pub fn to_flags(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (k, v) in &self.values {
            out.push(format!("--{k}"));
            if !v.is_empty() {
                out.push(v.clone());
            }
        }
        out
    }
}
