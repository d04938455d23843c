//! Flat `key = value` configuration text.

use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// Ordered key-value pairs. Later assignments to the same key win.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config {
    entries: IndexMap<String, String>,
}

fn config_error(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.split('.').all(|part| {
            !part.is_empty()
                && part
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        })
}

impl Config {
    /// Parses one assignment per line; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Config::default();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_error(
                    format!("line {}", number + 1),
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !valid_key(key) {
            return Err(config_error(key, "keys are dotted identifiers"));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(config_error(assignment, "override must look like key=value"));
        };
        self.set(key.trim(), value.trim())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Serializes back to the text format.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut c = Config::parse("# header\ndim = 2\n\ngrid.n_points = 64 # inline\n").unwrap();
        assert_eq!(c.get("dim"), Some("2"));
        assert_eq!(c.get("grid.n_points"), Some("64"));
        c.apply_override("dim=3").unwrap();
        assert_eq!(c.get("dim"), Some("3"));
        assert_eq!(Config::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_malformed_lines() {
        let err = Config::parse("dim 2").unwrap_err();
        assert!(err.to_string().contains("line 1"));
        assert!(Config::parse("a..b = 1").is_err());
        assert!(Config::default().apply_override("novalue").is_err());
    }
}
