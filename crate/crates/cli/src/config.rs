//! Run configuration. Every physics quantity is in units of the electron
//! mass except the `experiment` block, which is SI.

use std::path::Path;

use kdspin_core::dirac::TiltedSpin;
use kdspin_core::evolution::{PlateauMethod, DEFAULT_STEPS_PER_CYCLE};
use kdspin_core::experiment::ExperimentConfig;
use kdspin_core::field::{DEFAULT_RAMP_CYCLES, DEFAULT_TRUNCATION};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Perturbation,
    ComptonCheck,
    Tune,
    Experiment,
    Sweep,
}

/// Longitudinal momentum: a number, or `"tuned"` to search for the value
/// that removes the spin-preserving part.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LongitudinalMomentum {
    Value(f64),
    Named(Tuned),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tuned {
    Tuned,
}

/// Window length, ramps included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Duration {
    Fs(f64),
    Cycles(f64),
    /// Multiples of the Rabi period predicted by perturbation theory,
    /// plus the ramps.
    RabiPeriods(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Se,
    Nw,
}

impl From<Spin> for TiltedSpin {
    fn from(s: Spin) -> Self {
        match s {
            Spin::Se => TiltedSpin::SouthEast,
            Spin::Nw => TiltedSpin::NorthWest,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Physics {
    pub k_l: f64,
    /// `e𝔄/m` of the linearly polarized beam.
    pub xi: f64,
    /// `e𝔄'/m` of the circularly polarized beam.
    pub xi_prime: f64,
    pub p_z: LongitudinalMomentum,
    /// Transverse momentum `p_y` of the incoming electron.
    pub q2: f64,
    pub truncation: usize,
    pub steps_per_cycle: usize,
    pub ramp_cycles: u64,
    pub duration: Duration,
    pub initial_spin: Spin,
    pub method: PlateauMethod,
    /// Cycles between samples; omitted gives about a thousand samples.
    pub sample_stride_cycles: Option<u64>,
}

impl Default for Physics {
    fn default() -> Self {
        Self {
            k_l: 0.0254,
            xi: 4.74e-3,
            xi_prime: 4.74e-3,
            p_z: LongitudinalMomentum::Named(Tuned::Tuned),
            q2: 0.0,
            truncation: DEFAULT_TRUNCATION,
            steps_per_cycle: DEFAULT_STEPS_PER_CYCLE,
            ramp_cycles: DEFAULT_RAMP_CYCLES,
            duration: Duration::Fs(20.0),
            initial_spin: Spin::Se,
            method: PlateauMethod::Floquet,
            sample_stride_cycles: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// Sets both field amplitudes.
    Xi,
    Q2,
    PZ,
    KL,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: Axis,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub csv: String,
    pub summary: String,
}

impl Default for Outputs {
    fn default() -> Self {
        Self { csv: "timeseries.csv".into(), summary: "summary.json".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub physics: Physics,
    /// Random on-shell points for `compton-check`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_samples() -> usize {
    100
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Shape checks that need no physics.
    pub fn validate(&self) -> Result<(), CliError> {
        let p = &self.physics;
        let bad = |field: &str, why: &str| Err(CliError::Config(format!("physics.{field}: {why}")));
        if !(p.k_l > 0.0 && p.k_l.is_finite()) {
            return bad("k_l", "must be positive");
        }
        if !(p.xi >= 0.0 && p.xi_prime >= 0.0 && p.xi.is_finite() && p.xi_prime.is_finite()) {
            return bad("xi", "amplitudes must be finite and non-negative");
        }
        if p.truncation < 2 {
            return bad("truncation", "need at least rungs -2..2");
        }
        let length = match p.duration {
            Duration::Fs(x) | Duration::Cycles(x) | Duration::RabiPeriods(x) => x,
        };
        if !(length >= 0.0 && length.is_finite()) {
            return bad("duration", "must be finite and non-negative");
        }
        if self.mode == Mode::ComptonCheck && self.samples == 0 {
            return Err(CliError::Config("samples: must be positive".into()));
        }
        if self.mode == Mode::Sweep {
            match &self.sweep {
                None => return Err(CliError::Config("sweep: required for mode \"sweep\"".into())),
                Some(s) if s.values.len() < 2 => {
                    return Err(CliError::Config(format!("sweep.values: need at least 2 points, got {}", s.values.len())))
                }
                Some(s) if s.values.iter().any(|v| !v.is_finite()) => {
                    return Err(CliError::Config("sweep.values: must be finite".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}
