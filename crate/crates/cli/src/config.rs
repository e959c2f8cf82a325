//! Optional TOML configuration mirroring the command-line flags, one table
//! per subcommand. Values given on the command line always win.
//!
//! ```toml
//! [keygen]
//! group = "orth"
//! d = 2
//! n = 3
//! seed = 1
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub keygen: KeygenConfig,
    pub embed: EmbedConfig,
    pub verify: VerifyConfig,
    pub graph: GraphConfig,
    pub bits: BitsConfig,
    pub experiment: ExperimentConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KeygenConfig {
    pub group: Option<String>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub intrinsic_dim: Option<usize>,
    pub mode: Option<String>,
    pub m: Option<usize>,
    pub allow_undersized: Option<bool>,
    pub psi: Option<String>,
    pub signature: Option<String>,
    pub center: Option<bool>,
    pub scale: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedConfig {
    pub key: Option<PathBuf>,
    pub input: Option<PathBuf>,
    pub header: Option<bool>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub key: Option<PathBuf>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub pairs_file: Option<PathBuf>,
    pub timestamps: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub input: Option<PathBuf>,
    pub input_a: Option<PathBuf>,
    pub input_b: Option<PathBuf>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub log: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BitsConfig {
    pub group: Option<String>,
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub eps: Option<f64>,
    pub psi: Option<String>,
    pub intrinsic_dim: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub intrinsic_dim: Option<usize>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub seed: Option<u64>,
    pub train: Option<usize>,
    pub test: Option<usize>,
    pub psi: Option<String>,
    pub out_csv: Option<PathBuf>,
}

pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
}

/// Command-line value wins; config fills the gaps.
pub fn merge<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::usage(format!("missing required value for --{flag}")))
}
