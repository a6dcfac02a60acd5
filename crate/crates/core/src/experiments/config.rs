//! Flat `key = value` configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Values are checked
//! against the key's type when set, so a [`Config`] never holds a value that
//! a pipeline cannot read.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

use crate::precision::MIN_DIGITS;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("unknown config key '{key}'{}", line_suffix(*.line))]
    UnknownKey { key: String, line: Option<usize> },
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Malformed { line: usize, text: String },
    #[error("line {line}: key '{key}' given twice")]
    Duplicate { key: String, line: usize },
    #[error("invalid value {value:?} for '{key}': {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("missing required setting '{0}'")]
    Missing(String),
}

fn line_suffix(line: Option<usize>) -> String {
    line.map(|l| format!(" on line {l}")).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Real,
    Count,
    Digits,
    Seed,
    Pair,
    List,
    Path,
}

const KEYS: &[(&str, Kind)] = &[
    ("sigma", Kind::Real),
    ("t1", Kind::Real),
    ("dt", Kind::Real),
    ("n", Kind::Count),
    ("digits", Kind::Digits),
    ("bracket", Kind::Pair),
    ("t_list", Kind::List),
    ("sigma_list", Kind::List),
    ("output_dir", Kind::Path),
    ("seed", Kind::Seed),
    ("t", Kind::Real),
    ("b", Kind::Real),
    ("jobs", Kind::Count),
];

/// Every key a config may contain.
pub fn allowed_keys() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|(k, _)| *k)
}

fn kind_of(key: &str) -> Option<Kind> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, kind)| *kind)
}

fn parse_real(text: &str) -> Result<f64, String> {
    let v: f64 = text.parse().map_err(|_| "not a number".to_string())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err("must be finite".into())
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|s| s.is_empty()) {
        return Err("empty list element".into());
    }
    items.into_iter().map(parse_real).collect()
}

fn check(key: &str, kind: Kind, value: &str) -> Result<(), ConfigError> {
    let verdict = match kind {
        Kind::Real => parse_real(value).map(drop),
        Kind::Count => match value.parse::<usize>() {
            Ok(0) => Err("must be at least 1".into()),
            Ok(_) => Ok(()),
            Err(_) => Err("not a positive integer".into()),
        },
        Kind::Digits => match value.parse::<u32>() {
            Ok(d) if d < MIN_DIGITS => Err(format!("at least {MIN_DIGITS} digits are required")),
            Ok(_) => Ok(()),
            Err(_) => Err("not a digit count".into()),
        },
        Kind::Seed => value
            .parse::<u64>()
            .map(drop)
            .map_err(|_| "not an unsigned integer".into()),
        Kind::Pair => parse_list(value).and_then(|v| {
            if v.len() == 2 {
                Ok(())
            } else {
                Err("expected two comma-separated numbers".into())
            }
        }),
        Kind::List => parse_list(value).map(drop),
        Kind::Path => {
            if value.is_empty() {
                Err("empty path".into())
            } else {
                Ok(())
            }
        }
    };
    verdict.map_err(|reason| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason,
    })
}

/// A validated key-value map; iteration is in key order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return Err(ConfigError::Malformed {
                    line,
                    text: raw.to_string(),
                });
            };
            let key = key.trim();
            if kind_of(key).is_none() {
                return Err(ConfigError::UnknownKey {
                    key: key.to_string(),
                    line: Some(line),
                });
            }
            if cfg.values.contains_key(key) {
                return Err(ConfigError::Duplicate {
                    key: key.to_string(),
                    line,
                });
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let kind = kind_of(key).ok_or_else(|| ConfigError::UnknownKey {
            key: key.to_string(),
            line: None,
        })?;
        let value = value.trim();
        check(key, kind, value)?;
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Sets `key` only when it is absent.
    pub fn set_default(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !self.contains(key) {
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Overlays `other`; its values win.
    pub fn merge(&mut self, other: &Config) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn as_map(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    fn required(&self, key: &str) -> Result<&str, ConfigError> {
        self.raw(key).ok_or_else(|| ConfigError::Missing(key.to_string()))
    }

    // Values were validated on entry, so the parses below cannot fail.

    pub fn real(&self, key: &str) -> Result<f64, ConfigError> {
        Ok(parse_real(self.required(key)?).expect("validated"))
    }

    pub fn opt_real(&self, key: &str) -> Option<f64> {
        self.raw(key).map(|v| parse_real(v).expect("validated"))
    }

    pub fn count(&self, key: &str) -> Result<usize, ConfigError> {
        Ok(self.required(key)?.parse().expect("validated"))
    }

    pub fn digits(&self) -> Result<u32, ConfigError> {
        Ok(self.required("digits")?.parse().expect("validated"))
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        Ok(parse_list(self.required(key)?).expect("validated"))
    }

    pub fn pair(&self, key: &str) -> Result<(f64, f64), ConfigError> {
        let v = self.list(key)?;
        Ok((v[0], v[1]))
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.raw("output_dir").map(PathBuf::from)
    }

    pub fn seed(&self) -> Option<u64> {
        self.raw("seed").map(|v| v.parse().expect("validated"))
    }

    /// Worker count for sweeps; 1 unless `jobs` is set.
    pub fn jobs(&self) -> usize {
        self.raw("jobs").map_or(1, |v| v.parse().expect("validated"))
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.values {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
