//! Layered settings: built-in defaults, then a key = value config file, then
//! flags given on the command line. Keys are the long flag names.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use clap::parser::ValueSource;
use clap::{ArgMatches, Command};

#[derive(Debug, Clone, Default, PartialEq, Eq, serde::Serialize)]
#[serde(transparent)]
pub struct Settings(BTreeMap<String, String>);

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key = value", n + 1))?;
        let key = k.trim().trim_start_matches("--").to_string();
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            bail!("config line {}: duplicate key '{key}'", n + 1);
        }
    }
    Ok(out)
}

fn key_of(arg: &clap::Arg) -> String {
    arg.get_long()
        .map_or_else(|| arg.get_id().to_string(), str::to_string)
}

impl Settings {
    /// Resolves the settings of one subcommand from its parsed matches.
    pub fn resolve(cmd: &Command, matches: &ArgMatches) -> Result<Self> {
        let mut defaults = BTreeMap::new();
        let mut flags = BTreeMap::new();
        let mut known = Vec::new();
        for arg in cmd.get_arguments() {
            let id = arg.get_id().as_str();
            if id == "help" || id == "version" || id == "config" {
                continue;
            }
            let key = key_of(arg);
            known.push(key.clone());
            let Some(raw) = matches.get_raw(id).and_then(|mut v| v.next()) else {
                continue;
            };
            let value = raw.to_string_lossy().into_owned();
            match matches.value_source(id) {
                Some(ValueSource::CommandLine) | Some(ValueSource::EnvVariable) => {
                    flags.insert(key, value)
                }
                _ => defaults.insert(key, value),
            };
        }
        let mut merged = defaults;
        if let Some(path) = matches.get_raw("config").and_then(|mut v| v.next()) {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {path:?}"))?;
            let file = parse_config_text(&text)?;
            let unknown: Vec<&String> = file.keys().filter(|k| !known.contains(k)).collect();
            if !unknown.is_empty() {
                bail!("unknown config keys: {unknown:?}");
            }
            merged.extend(file);
        }
        merged.extend(flags);
        Ok(Self(merged))
    }

    #[cfg(test)]
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        Self(
            pairs
                .into_iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        )
    }

    /// Value of `key`; empty strings count as unset.
    pub fn opt(&self, key: &str) -> Option<&str> {
        self.0
            .get(key)
            .map(String::as_str)
            .filter(|v| !v.is_empty())
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.opt(key)
            .ok_or_else(|| anyhow!("missing required setting --{key}"))
    }

    pub fn get<T>(&self, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        let raw = self.str(key)?;
        raw.parse::<T>()
            .map_err(|e| anyhow!("invalid value '{raw}' for --{key}: {e}"))
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        match self.opt(key) {
            None => Ok(false),
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(other) => bail!("invalid value '{other}' for --{key}: expected true or false"),
        }
    }
}
