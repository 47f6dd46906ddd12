pub mod disentangle;
pub mod games;
pub mod hamiltonian;
pub mod states;
pub mod verifiers;

use std::path::Path;

use qphlab_core::qstate::rng::derive_stream;
use qphlab_core::SeededRng;
use serde::de::DeserializeOwned;

use crate::error::{config_err, CliError};

pub struct Ctx {
    pub name: &'static str,
    pub seed: Option<u64>,
}

impl Ctx {
    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| config_err(format!("`{}` is stochastic: --seed is required", self.name)))
    }

    /// Stream for instance `index` under `label`: derived from the seed and
    /// the label "<subcommand>/<label>".
    pub fn rng(&self, label: &str, index: u64) -> Result<SeededRng, CliError> {
        Ok(derive_stream(self.seed()?, &format!("{}/{label}", self.name), index))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

/// "2x3" → [2, 3].
pub fn parse_dims(spec: &str) -> Result<Vec<usize>, CliError> {
    let dims: Vec<usize> = spec
        .split('x')
        .map(|d| d.trim().parse::<usize>().map_err(|_| config_err(format!("bad layout `{spec}`, expected e.g. 2x3"))))
        .collect::<Result<_, _>>()?;
    if dims.iter().any(|&d| d < 2) {
        return Err(config_err(format!("layout `{spec}` has a factor below 2")));
    }
    Ok(dims)
}

pub fn pick<'a>(value: &'a str, allowed: &[&str], what: &str) -> Result<&'a str, CliError> {
    if allowed.contains(&value) {
        Ok(value)
    } else {
        Err(config_err(format!("{what} must be one of {allowed:?}, got `{value}`")))
    }
}
