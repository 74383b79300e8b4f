//! `key = value` configuration file.
//!
//! Looked up at `$ALIAS_CENSUS_CONFIG`, then
//! `$XDG_CONFIG_HOME/alias-census/config`, then
//! `~/.config/alias-census/config`. Blank lines and lines starting with `#`
//! are ignored. Command-line flags win over the file.

use anyhow::{bail, Context, Result};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const ENV_VAR: &str = "ALIAS_CENSUS_CONFIG";

pub const KEYS: &[&str] = &[
    "store",
    "kb_dir",
    "json",
    "seed",
    "hash",
    "stopwords",
    "min_support",
    "min_count",
    "rules",
    "backend",
    "api_url",
    "rate_limit",
    "term",
    "max_size",
    "step",
];

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Config {
    values: BTreeMap<String, String>,
    source: Option<PathBuf>,
}

impl Config {
    pub fn parse(text: &str, source: Option<PathBuf>) -> Result<Config> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", i + 1);
            };
            let key = k.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                bail!("line {}: unknown key `{}`", i + 1, k.trim());
            }
            let v = v.trim();
            let v = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
            values.insert(key, v.to_string());
        }
        Ok(Config { values, source })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Config::parse(&text, Some(path.to_path_buf())).with_context(|| format!("in config {}", path.display()))
    }

    /// The explicit path if given, else the first default location that
    /// exists, else an empty config. An explicit path must exist.
    pub fn discover(explicit: Option<&Path>) -> Result<Config> {
        if let Some(p) = explicit {
            return Config::load(p);
        }
        if let Some(p) = std::env::var_os(ENV_VAR).filter(|p| !p.is_empty()) {
            return Config::load(Path::new(&p));
        }
        for p in default_paths() {
            if p.is_file() {
                return Config::load(&p);
            }
        }
        Ok(Config::default())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(KEYS.contains(&key), "unregistered key {key}");
        self.values.get(key).map(String::as_str)
    }

    pub fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| {
                let src = self.source.as_ref().map(|p| format!(" in {}", p.display())).unwrap_or_default();
                anyhow::anyhow!("bad value `{v}` for `{key}`{src}: {e}")
            }),
        }
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None => Ok(false),
            Some(v) => match v.to_ascii_lowercase().as_str() {
                "1" | "true" | "yes" | "on" => Ok(true),
                "0" | "false" | "no" | "off" => Ok(false),
                _ => bail!("bad boolean `{v}` for `{key}`"),
            },
        }
    }
}

fn default_paths() -> Vec<PathBuf> {
    let mut out = Vec::new();
    if let Some(x) = std::env::var_os("XDG_CONFIG_HOME").filter(|x| !x.is_empty()) {
        out.push(PathBuf::from(x).join("alias-census/config"));
    }
    if let Some(h) = std::env::var_os("HOME").filter(|h| !h.is_empty()) {
        out.push(PathBuf::from(h).join(".config/alias-census/config"));
    }
    out
}
