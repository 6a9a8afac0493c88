//! Batch runner for the Kapitza-Dirac spin simulator.
//!
//! A run is described by one JSON [`config::RunConfig`]; [`run`] executes
//! it and writes a CSV table and a JSON summary into an output directory.
//! Output depends on the configuration only, so repeated runs are
//! byte-identical.

pub mod config;
pub mod halton;
pub mod modes;

use std::path::{Path, PathBuf};

use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or unreadable configuration, or an unusable output directory.
    #[error("config error: {0}")]
    Config(String),
    #[error("physics error: {0}")]
    Physics(#[from] kdspin_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Physics(_) => 3,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub steps_per_cycle: Option<usize>,
    pub truncation: Option<usize>,
    /// Worker threads for sweeps; `None` uses one per core.
    pub jobs: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        if let Some(s) = self.steps_per_cycle {
            cfg.physics.steps_per_cycle = s;
        }
        if let Some(n) = self.truncation {
            cfg.physics.truncation = n;
        }
        cfg.validate()
    }
}

/// Runs `cfg` and returns the files written under `out`.
pub fn run(cfg: &RunConfig, out: &Path, jobs: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
    modes::dispatch(cfg, out, jobs)
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("summaries serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}
