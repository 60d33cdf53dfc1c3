//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Parsed configuration plus the original text for echoing.
///
/// A key may be scoped to one algorithm as `algorithm.key`; scoped lookups
/// fall back to the bare key.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
    text: String,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{}`", lineno + 1, raw.trim())))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if values.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { values, text: text.to_string() })
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let text: String = pairs.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        Self::parse(&text)
    }

    /// Original text, for echoing into output headers.
    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.scoped(None, key)
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| Error::Config(format!("missing required key `{key}`")))
    }

    /// Look up `scope.key`, then `key`.
    pub fn scoped<T: FromStr>(&self, scope: Option<&str>, key: &str) -> Result<Option<T>> {
        let scoped_key = scope.map(|s| format!("{s}.{key}"));
        let (name, raw) = match scoped_key.as_deref().and_then(|k| self.raw(k).map(|v| (k, v))) {
            Some(hit) => hit,
            None => match self.raw(key) {
                Some(v) => (key, v),
                None => return Ok(None),
            },
        };
        raw.parse::<T>().map(Some).map_err(|_| Error::Config(format!("invalid value `{raw}` for `{name}`")))
    }

    pub fn scoped_or<T: FromStr>(&self, scope: Option<&str>, key: &str, default: T) -> Result<T> {
        Ok(self.scoped(scope, key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list(&self, key: &str) -> Option<Vec<String>> {
        self.raw(key).map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
    }

    /// Fail on keys outside `known` (scoped keys are checked by suffix).
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        for key in self.keys() {
            let bare = key.rsplit_once('.').map_or(key, |(_, k)| k);
            if !known.contains(&bare) {
                return Err(Error::Config(format!("unknown key `{key}`")));
            }
        }
        Ok(())
    }
}
