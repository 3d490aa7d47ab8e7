//! Plain `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Keys are case-sensitive
//! (`N` and `alpha`, `A`, `B`, `V0` follow the model notation).

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got {raw:?}", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Parse(format!("line {}: empty key", lineno + 1)));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parses the value stored under `key`, if present.
    pub fn get_parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::Parse(format!("cannot parse {key} = {v:?}"))),
        }
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    /// Overlays `other` on top of `self`; keys in `other` win.
    pub fn merged_with(mut self, other: &KeyValues) -> Self {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let kv = KeyValues::parse("# model file\nmodel = superparabolic\n\nN=6  # even\n alpha = 0.8\n").unwrap();
        assert_eq!(kv.get("model"), Some("superparabolic"));
        assert_eq!(kv.get_parsed::<u32>("N").unwrap(), Some(6));
        assert_eq!(kv.get_parsed::<f64>("alpha").unwrap(), Some(0.8));
        assert_eq!(kv.get("A"), None);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(KeyValues::parse("just words").is_err());
        assert!(KeyValues::parse("= 3").is_err());
        let kv = KeyValues::parse("N = six").unwrap();
        assert!(kv.get_parsed::<u32>("N").is_err());
    }

    #[test]
    fn overlay_prefers_later_values() {
        let base = KeyValues::parse("N = 2\nalpha = 1").unwrap();
        let mut flags = KeyValues::default();
        flags.set("alpha", "2.5");
        let merged = base.merged_with(&flags);
        assert_eq!(merged.get("alpha"), Some("2.5"));
        assert_eq!(merged.get("N"), Some("2"));
    }
}
