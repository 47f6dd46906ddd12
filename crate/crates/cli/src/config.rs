//! Global options, the optional JSON config file and the merge rule:
//! a flag given on the command line wins over the same key in the file.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct GlobalArgs {
    /// Top-level seed; required by stochastic subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory for results and the run manifest. Without it the
    /// results go to stdout and the manifest to stderr.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// JSON config file: {"subcommand", "seed", "out", "format", "threads", "params"}.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "QPHLAB_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub subcommand: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))
    }
}

/// Resolved global settings.
#[derive(Clone, Debug)]
pub struct Settings {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

pub fn resolve(global: &GlobalArgs, file: &ConfigFile, subcommand: &str) -> Result<Settings, CliError> {
    if let Some(name) = &file.subcommand {
        if name != subcommand {
            return Err(CliError::Config(format!("config file is for `{name}`, not `{subcommand}`")));
        }
    }
    let threads = global.threads.or(file.threads);
    if threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    Ok(Settings {
        seed: global.seed.or(file.seed),
        out: global.out.clone().or_else(|| file.out.clone()),
        format: global.format.or(file.format),
        threads,
    })
}

/// Overlays the flags that were given on the file's parameter map and
/// deserializes the result, rejecting unknown keys.
pub fn merge_params<P: Serialize + DeserializeOwned>(file: &Map<String, Value>, flags: &P) -> Result<P, CliError> {
    let mut merged = file.clone();
    match serde_json::to_value(flags).map_err(|e| CliError::Config(e.to_string()))? {
        Value::Object(given) => merged.extend(given.into_iter().filter(|(_, v)| !v.is_null())),
        _ => unreachable!("parameter structs serialize to objects"),
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("params: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields, default)]
    struct P {
        n: Option<usize>,
        eps: Option<f64>,
    }

    #[test]
    fn flags_override_file() {
        let file: Map<String, Value> = serde_json::from_str(r#"{"n": 3, "eps": 0.5}"#).unwrap();
        let flags = P { n: Some(7), eps: None };
        assert_eq!(merge_params(&file, &flags).unwrap(), P { n: Some(7), eps: Some(0.5) });
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let file: Map<String, Value> = serde_json::from_str(r#"{"m": 3}"#).unwrap();
        assert!(matches!(merge_params(&file, &P::default()), Err(CliError::Config(_))));
        assert!(serde_json::from_str::<ConfigFile>(r#"{"sed": 1}"#).is_err());
    }
}
