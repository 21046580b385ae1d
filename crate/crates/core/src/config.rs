//! Flat `key = value` run configuration.
//!
//! Files hold one `key = value` pair per line; `#` starts a comment and
//! lists are comma separated. Command-line flags override file values. The
//! resolved configuration (every key, defaults filled in) is emitted in the
//! same format, so it can be fed back unchanged.

use std::collections::BTreeMap;
use std::path::Path;

use crate::{Error, Result};

/// Every accepted key with its default; `None` marks a required key and
/// `Some("")` an optional key without default.
pub const KEYS: &[(&str, Option<&str>)] = &[
    ("theta", None),
    ("lambda", None),
    ("j_bar", None),
    ("a", Some("2.5")),
    ("beta", Some("0.1")),
    ("tau_s", Some("1.3")),
    ("n", Some("1000")),
    ("dt", Some("0.05")),
    ("t_end", Some("100")),
    ("init_mean", Some("0.1")),
    // "stationary" means λ²θ/2
    ("init_var", Some("stationary")),
    ("disorder_seed", Some("1")),
    ("noise_seed", Some("2")),
    ("root_seed", Some("3")),
    ("stride", Some("1")),
    ("jobs", Some("0")),
    ("out", Some(".")),
    ("tagged", Some("16")),
    ("panels", Some("64")),
    ("m", Some("1000")),
    ("iters", Some("8")),
    ("fix_beta", Some("")),
    ("fix_a", Some("")),
    ("grid_min", Some("0.01")),
    ("grid_max", Some("10")),
    ("grid_points", Some("500")),
    ("branches", Some("0")),
    ("ns", Some("100,200,400,800,1600,3200")),
    ("trials", Some("16")),
    ("mode", Some("both")),
    ("slope_min", Some("-1.3")),
    ("slope_max", Some("-0.7")),
    ("amp_threshold", Some("0.05")),
    ("transient", Some("0.5")),
    ("classify_t_end", Some("1200")),
    ("root_re", Some("0")),
    ("root_im", Some("1")),
];

fn normalize(key: &str) -> String {
    key.trim().replace('-', "_")
}

fn check_known(key: &str) -> Result<()> {
    if KEYS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(Error::config(format!("unknown key `{key}`")))
    }
}

/// Parses `key = value` text. Unknown and repeated keys are errors.
pub fn parse_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = normalize(key);
        check_known(&key)?;
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::config(format!("key `{key}` is set twice")));
        }
    }
    Ok(map)
}

pub fn read_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    parse_text(&text)
}

/// A fully resolved parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    /// Merges `file` and `overrides` (which win), fills defaults, and
    /// rejects unknown or missing keys.
    pub fn resolve(file: BTreeMap<String, String>, overrides: BTreeMap<String, String>) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (k, v) in file.into_iter().chain(overrides) {
            let k = normalize(&k);
            check_known(&k)?;
            values.insert(k, v);
        }
        for (key, default) in KEYS {
            if !values.contains_key(*key) {
                match default {
                    Some(d) => {
                        values.insert(key.to_string(), d.to_string());
                    }
                    None => return Err(Error::config(format!("missing required key `{key}`"))),
                }
            }
        }
        let params = Self { values };
        for key in ["theta", "lambda", "j_bar"] {
            params.f64(key)?;
        }
        Ok(params)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::resolve(parse_text(text)?, BTreeMap::new())
    }

    /// The configuration in file format, one key per line in sorted order.
    pub fn emit(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.raw(key);
        raw.parse().map_err(|e| Error::config(format!("key `{key}`: cannot parse {raw:?}: {e}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let x: f64 = self.parse(key)?;
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::config(format!("key `{key}` must be finite")))
        }
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        if self.raw(key).is_empty() {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.parse(key)
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.parse(key)
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        self.raw(key)
            .split(',')
            .map(|s| s.trim().parse().map_err(|e| Error::config(format!("key `{key}`: {e}"))))
            .collect()
    }
}
