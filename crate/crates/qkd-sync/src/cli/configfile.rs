//! Flat `key = value` configuration files. Keys match the long flag
//! names; unknown keys are rejected with the list of valid ones.

use std::collections::BTreeMap;
use std::path::Path;

use crate::cli::parse_real;
use crate::error::{Error, Result};

pub struct ConfigMap {
    values: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Loads and validates a config file; an absent path yields an empty
    /// map so resolution code has a single path.
    pub fn load(path: Option<&Path>, keys: &[&str], common_keys: &[&str]) -> Result<Self> {
        let mut values = BTreeMap::new();
        let Some(path) = path else {
            return Ok(Self { values });
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key = value, got {line:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            if !keys.contains(&key.as_str()) && !common_keys.contains(&key.as_str()) {
                let mut valid: Vec<&str> = keys.iter().chain(common_keys).copied().collect();
                valid.sort_unstable();
                return Err(Error::Config(format!(
                    "{}:{}: unknown key {key:?}; valid keys: {}",
                    path.display(),
                    lineno + 1,
                    valid.join(", ")
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn string(&self, key: &str) -> Result<Option<String>> {
        Ok(self.values.get(key).cloned())
    }

    pub fn opt_f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            Some(v) => parse_real(v)
                .map(Some)
                .map_err(|e| Error::Config(format!("config key {key}: {e}"))),
            None => Ok(None),
        }
    }

    pub fn f64_or(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        Ok(self.opt_f64(key, flag)?.unwrap_or(default))
    }

    pub fn require_f64(&self, key: &str, flag: Option<f64>) -> Result<f64> {
        self.opt_f64(key, flag)?
            .ok_or_else(|| Error::Config(format!("missing required parameter {key}")))
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.values.get(key) {
            Some(v) => v
                .parse::<u64>()
                .map(Some)
                .map_err(|e| Error::Config(format!("config key {key}: invalid integer {v:?}: {e}"))),
            None => Ok(None),
        }
    }

    pub fn u64_or(&self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        Ok(self.get_u64(key)?.unwrap_or(default))
    }

    pub fn require_u64(&self, key: &str, flag: Option<u64>) -> Result<u64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        self.get_u64(key)?
            .ok_or_else(|| Error::Config(format!("missing required parameter {key}")))
    }

    /// A boolean flag is true when set on the command line or when the
    /// config file says true/1/yes.
    pub fn bool_or(&self, key: &str, flag: bool) -> Result<bool> {
        if flag {
            return Ok(true);
        }
        match self.values.get(key).map(String::as_str) {
            None => Ok(false),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(other) => Err(Error::Config(format!(
                "config key {key}: expected a boolean, got {other:?}"
            ))),
        }
    }
}
