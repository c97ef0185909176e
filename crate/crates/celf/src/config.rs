//! Flat `key = value` configuration files.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Duplicate keys are errors. Consumers list their allowed keys and reject
//! anything else, so typos never pass silently.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Parsed key=value file with typed accessors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueFile {
    entries: BTreeMap<String, String>,
}

impl KeyValueFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                message: format!("line {line_no}: expected key = value, found '{line}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::Config {
                    message: format!("line {line_no}: empty key"),
                });
            }
            if value.is_empty() {
                return Err(Error::Config {
                    message: format!("line {line_no}: empty value for '{key}'"),
                });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config {
                    message: format!("line {line_no}: duplicate key '{key}'"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|v| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => {
                let v: f64 = raw.parse().map_err(|_| Error::Config {
                    message: format!("key '{key}': invalid number '{raw}'"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Config {
                        message: format!("key '{key}': value must be finite"),
                    });
                }
                Ok(Some(v))
            }
        }
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config {
                    message: format!("key '{key}': invalid integer '{raw}'"),
                }),
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        Ok(self.get_u64(key)?.map(|v| v as usize))
    }

    /// Comma-separated list of floats, e.g. `alpha = 0.1, 0.3, 1`.
    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => {
                let mut out = Vec::new();
                for part in raw.split(',') {
                    let part = part.trim();
                    let v: f64 = part.parse().map_err(|_| Error::Config {
                        message: format!("key '{key}': invalid number '{part}'"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Config {
                            message: format!("key '{key}': values must be finite"),
                        });
                    }
                    out.push(v);
                }
                Ok(Some(out))
            }
        }
    }

    /// Error on any key outside `allowed` (sorted order, so deterministic).
    pub fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(Error::Config {
                    message: format!("unknown key '{key}'"),
                });
            }
        }
        Ok(())
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}
