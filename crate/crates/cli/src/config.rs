//! Config-file loading and flag merging.
//!
//! The config file is TOML with kebab-case keys mirroring the
//! command-line flags; noise-model keys live in a `[noise]` table.
//! Command-line flags override file values. Unknown keys are rejected.

use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    /// Bad input: malformed file, unknown key, out-of-range or
    /// inconsistent parameters. Exit code 2.
    Validation(String),
    /// Failure while running a valid experiment. Exit code 3.
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

pub fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn runtime(err: impl std::fmt::Display) -> CliError {
    CliError::Runtime(err.to_string())
}

/// `[noise]` table of the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct NoiseSection {
    pub eta: Option<f64>,
    pub angle_mode: Option<String>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub p_s: Option<f64>,
    pub silent_window: Option<u32>,
    pub silent_duration: Option<u32>,
    pub apply_to_ancillas: Option<bool>,
}

/// Top-level config file. Every field mirrors a command-line flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub experiment: Option<String>,
    pub code: Option<String>,
    pub size: Option<usize>,
    pub sizes: Option<Vec<usize>>,
    pub shots: Option<u64>,
    pub cycles: Option<u32>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub measure_mode: Option<String>,
    pub skip_stab: Option<usize>,
    pub skip_cycles: Option<u32>,
    pub ps: Option<Vec<f64>>,
    pub target: Option<f64>,
    pub n_ops: Option<f64>,
    pub n_logical: Option<f64>,
    pub n_code: Option<f64>,
    pub p_th: Option<f64>,
    pub nc_min: Option<u32>,
    pub nc_max: Option<u32>,
    pub form: Option<String>,
    #[serde(default)]
    pub noise: NoiseSection,
}

impl FileConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| {
            validation(format!("cannot read config file {}: {e}", path.display()))
        })?;
        toml::from_str(&text).map_err(|e| validation(format!("config file: {e}")))
    }

    /// The file may pin the experiment; if it does, it must agree with
    /// the subcommand.
    pub fn check_experiment(&self, subcommand: &str) -> Result<(), CliError> {
        if let Some(exp) = &self.experiment {
            if exp != subcommand {
                return Err(validation(format!(
                    "key 'experiment' in the config file is '{exp}' but the subcommand is '{subcommand}'"
                )));
            }
        }
        Ok(())
    }
}

/// Flag-over-file resolution.
pub fn pick<T: Clone>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

pub fn require<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| validation(format!("missing required key '{key}'")))
}
