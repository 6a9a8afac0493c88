//! The six run modes. Each returns the paths it wrote.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use kdspin_core::analysis::{channel_report, fit_rabi, ChannelReport, RabiFit};
use kdspin_core::compton::{
    channel_amplitudes, compton_terms, compton_tensor, crossed_terms, gauge_residual, ofpt_terms, sample_kinematics,
    Helicity,
};
use kdspin_core::consts::{fs_to_natural, natural_to_fs};
use kdspin_core::dirac::{spin_filter_matrix, tilted_spin_basis, SpinMatrix2, SpinState, TiltedSpin};
use kdspin_core::evolution::{PropagationOptions, Propagator, SimulationResult, StateVector, NORM_DRIFT_LIMIT};
use kdspin_core::experiment::{count_rate, ExperimentReport};
use kdspin_core::field::{LaserConfig, MomentumLadder};
use kdspin_core::perturbation::{
    contracted_spin_propagation, resonant_u20, short_time_probability, spin_preserving_weight,
    tune_longitudinal_momentum, ScaledKinematics,
};
use kdspin_core::C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Axis, Duration, LongitudinalMomentum, Mode, Physics, RunConfig, Sweep};
use crate::halton::halton;
use crate::{write_json, CliError};

/// Rabi frequency quoted for the reference run, in units of `m`.
pub const REFERENCE_RABI_FREQUENCY: f64 = 2.02e-7;

/// Residual above which a Compton sample counts as a miss.
pub const COMPTON_TOLERANCE: f64 = 1e-12;

pub(crate) fn dispatch(cfg: &RunConfig, out: &Path, jobs: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let summary = out.join(&cfg.outputs.summary);
    match cfg.mode {
        Mode::Simulate => {
            let sim = simulate(&cfg.physics)?;
            let csv = out.join(&cfg.outputs.csv);
            write_timeseries(&csv, &sim.report)?;
            write_json(&summary, &sim.summary())?;
            Ok(vec![csv, summary])
        }
        Mode::Perturbation => {
            write_json(&summary, &perturbation(&cfg.physics)?)?;
            Ok(vec![summary])
        }
        Mode::ComptonCheck => {
            write_json(&summary, &compton_check(cfg.samples, &cfg.physics)?)?;
            Ok(vec![summary])
        }
        Mode::Tune => {
            write_json(&summary, &tune(cfg.physics.k_l)?)?;
            Ok(vec![summary])
        }
        Mode::Experiment => {
            write_json(&summary, &experiment(cfg)?)?;
            Ok(vec![summary])
        }
        Mode::Sweep => {
            let sweep = cfg.sweep.as_ref().expect("validated");
            let table = sweep_rows(&cfg.physics, sweep, jobs)?;
            let csv = out.join("sweep.csv");
            write_sweep_csv(&csv, &table.rows)?;
            write_json(&summary, &table)?;
            if table.rows.iter().all(|r| r.error.is_some()) {
                return Err(CliError::Physics(kdspin_core::Error::InvalidArgument(format!(
                    "every sweep row failed; first: {}",
                    table.rows[0].error.as_deref().unwrap_or("")
                ))));
            }
            Ok(vec![csv, summary])
        }
    }
}

/// Field and ladder with every "derived" entry of [`Physics`] filled in.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub cfg: LaserConfig,
    pub ladder: MomentumLadder,
    pub p_z: f64,
    /// `2|⟨s↖|R|s↘⟩|` from the resonant second-order amplitude.
    pub omega_perturbative: f64,
}

pub fn resolve(p: &Physics) -> Result<Resolved, CliError> {
    let p_z = match p.p_z {
        LongitudinalMomentum::Value(v) => v,
        LongitudinalMomentum::Named(_) => tune_longitudinal_momentum(p.k_l)?,
    };
    let ladder = MomentumLadder::new([-p.k_l, p.q2, p_z], p.k_l, p.truncation)?;
    let base = LaserConfig::standing_wave(p.k_l, p.xi, p.xi_prime, 0)?.with_ramp_cycles(p.ramp_cycles);
    let omega_perturbative = if base.is_field_free() { 0.0 } else { resonant_u20(0.0, 0.0, &base, &ladder)?.rabi_frequency() };
    let total = match p.duration {
        Duration::Fs(t) => fs_to_natural(t),
        Duration::Cycles(c) => c * base.period(),
        Duration::RabiPeriods(r) => {
            if omega_perturbative == 0.0 {
                return Err(kdspin_core::Error::InvalidArgument("duration in Rabi periods needs a nonzero field".into()).into());
            }
            r * 2.0 * PI / omega_perturbative + 2.0 * p.ramp_cycles as f64 * base.period()
        }
    };
    let cfg = base.with_total_duration(total)?;
    Ok(Resolved { cfg, ladder, p_z, omega_perturbative })
}

/// One full-pulse run with its channel table and Rabi fit.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub physics: Physics,
    pub resolved: Resolved,
    pub result: SimulationResult,
    pub report: ChannelReport,
    /// Fit of `P(2, s↖)`; the error text when the series does not oscillate.
    pub fit: Result<RabiFit, String>,
}

pub fn simulate(p: &Physics) -> Result<Simulation, CliError> {
    let resolved = resolve(p)?;
    let opts = PropagationOptions {
        steps_per_cycle: p.steps_per_cycle,
        sample_stride_cycles: p.sample_stride_cycles,
        method: p.method,
        ..Default::default()
    };
    let initial: TiltedSpin = p.initial_spin.into();
    let psi = StateVector::electron(&resolved.ladder, 0, &initial.state())?;
    let mut prop = Propagator::new(&resolved.cfg, &resolved.ladder, &opts)?;
    let result = prop.run(&psi, opts.method, opts.sample_stride_cycles, NORM_DRIFT_LIMIT)?;
    let report = channel_report(&result, initial)?;
    let (t, y) = report.diffraction_series();
    let fit = fit_rabi(&t, &y).map_err(|e| e.to_string());
    Ok(Simulation { physics: p.clone(), resolved, result, report, fit })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelSummary {
    /// Largest `|P(2,s↖) + P(0,s↘) − 1|` over the samples.
    pub max_sum_deviation: f64,
    /// Largest departure of any tilted channel from the initial state.
    pub max_channel_deviation: f64,
    pub peak_t_fs: Option<f64>,
    pub peak_p2_nw: Option<f64>,
    /// `P(2,s↖) / P(2)` at the rung-2 maximum.
    pub purity_at_peak: Option<f64>,
    pub max_norm_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulateSummary {
    pub k_l: f64,
    pub xi: f64,
    pub xi_prime: f64,
    pub p_z: f64,
    pub q2: f64,
    pub truncation: usize,
    pub steps_per_cycle: usize,
    pub initial_spin: TiltedSpin,
    pub total_cycles: u64,
    pub duration_fs: f64,
    pub samples: usize,
    pub fit: Option<RabiFit>,
    pub fit_error: Option<String>,
    pub omega_perturbative: f64,
    pub fit_to_perturbative: Option<f64>,
    pub omega_reference: f64,
    pub fit_to_reference: Option<f64>,
    pub channels: ChannelSummary,
    pub max_norm_drift: f64,
    pub max_negative_weight: f64,
}

impl Simulation {
    pub fn channels(&self) -> ChannelSummary {
        let peak = self.report.purity_at_peak();
        let row = peak.map(|(i, _)| &self.report.rows[i]);
        ChannelSummary {
            max_sum_deviation: self.report.max_listed_sum_deviation(),
            max_channel_deviation: self.report.max_channel_deviation(),
            peak_t_fs: row.map(|r| r.t_fs),
            peak_p2_nw: row.map(|r| r.p2_nw),
            purity_at_peak: peak.map(|p| p.1),
            max_norm_residual: self.report.max_norm_residual(),
        }
    }

    pub fn summary(&self) -> SimulateSummary {
        let fit = self.fit.as_ref().ok().copied();
        let omega = fit.map(|f| f.omega);
        let r = &self.resolved;
        SimulateSummary {
            k_l: self.physics.k_l,
            xi: self.physics.xi,
            xi_prime: self.physics.xi_prime,
            p_z: r.p_z,
            q2: self.physics.q2,
            truncation: self.physics.truncation,
            steps_per_cycle: self.physics.steps_per_cycle,
            initial_spin: self.report.initial,
            total_cycles: r.cfg.total_cycles(),
            duration_fs: natural_to_fs(r.cfg.total_duration()),
            samples: self.result.len(),
            fit,
            fit_error: self.fit.as_ref().err().cloned(),
            omega_perturbative: r.omega_perturbative,
            fit_to_perturbative: omega.map(|w| w / r.omega_perturbative),
            omega_reference: REFERENCE_RABI_FREQUENCY,
            fit_to_reference: omega.map(|w| w / REFERENCE_RABI_FREQUENCY),
            channels: self.channels(),
            max_norm_drift: self.result.max_norm_drift,
            max_negative_weight: self.result.max_negative_weight(),
        }
    }
}

pub const TIMESERIES_HEADER: [&str; 5] = ["t_cycles", "t_fs", "P_2_nw", "P_0_se", "norm_residual"];

fn csv_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

pub fn write_timeseries(path: &Path, report: &ChannelReport) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(TIMESERIES_HEADER).map_err(|e| csv_error(path, e))?;
    for r in &report.rows {
        w.serialize((r.t_cycles, r.t_fs, r.p2_nw, r.p0_se, r.norm_residual)).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| csv_error(path, e))
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationSummary {
    pub p_z: f64,
    pub omega_perturbative: f64,
    pub omega_reference: f64,
    pub perturbative_to_reference: f64,
    /// `⟨s'|R|s⟩` over ↑/↓, the linear growth rate of `U₂₀`.
    pub rate: SpinMatrix2,
    /// Largest entrywise relative distance of the contracted map, scaled by
    /// its `⟨s↖|·|s↘⟩` element, from `s↖s↘†`.
    pub filter_matrix_error: f64,
    /// `|⟨s↘|C|s↘⟩| / ‖C‖`.
    pub spin_preserving_fraction: f64,
    pub duration_fs: f64,
    /// `(ξξ'k_l t/(8√2))²` at the configured duration.
    pub short_time_probability: f64,
}

pub fn filter_matrix_error(c: &SpinMatrix2) -> f64 {
    let (se, nw) = tilted_spin_basis();
    let lambda = c.matrix_element(&nw, &se);
    let ms = spin_filter_matrix();
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            worst = worst.max((c[(i, j)] / lambda - ms[(i, j)]).norm() / ms[(i, j)].norm());
        }
    }
    worst
}

pub fn perturbation(p: &Physics) -> Result<PerturbationSummary, CliError> {
    let r = resolve(p)?;
    let rate = resonant_u20(0.0, 0.0, &r.cfg, &r.ladder)?.rate;
    let kin = ScaledKinematics::from_momenta(p.k_l, p.q2, r.p_z)?;
    let unit = LaserConfig::standing_wave(p.k_l, 1.0, 1.0, 0)?;
    let c = contracted_spin_propagation(&unit, &kin)?;
    let (se, _) = tilted_spin_basis();
    let t = r.cfg.total_duration();
    Ok(PerturbationSummary {
        p_z: r.p_z,
        omega_perturbative: r.omega_perturbative,
        omega_reference: REFERENCE_RABI_FREQUENCY,
        perturbative_to_reference: r.omega_perturbative / REFERENCE_RABI_FREQUENCY,
        rate,
        filter_matrix_error: filter_matrix_error(&c),
        spin_preserving_fraction: c.matrix_element(&se, &se).norm() / c.frobenius_norm(),
        duration_fs: natural_to_fs(t),
        short_time_probability: short_time_probability(p.xi, p.xi_prime, p.k_l, t),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChannelEntry {
    pub initial: TiltedSpin,
    pub final_spin: TiltedSpin,
    pub photon: Helicity,
    pub amplitude: C64,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComptonSummary {
    pub samples: usize,
    /// Halton points rejected as singular kinematics.
    pub skipped: usize,
    /// `|Σ T − A| / |A|` with `A` the covariant amplitude.
    pub max_relative_residual: f64,
    pub median_relative_residual: f64,
    pub tolerance: f64,
    pub above_tolerance: usize,
    /// Largest `max|T| / |A|`: how much the time orderings cancel.
    pub max_cancellation: f64,
    pub max_gauge_residual: f64,
    pub max_crossing_residual: f64,
    pub p_z: f64,
    pub channels: Vec<ChannelEntry>,
}

/// Uniform point on the Bloch sphere.
fn spin_from_unit(a: f64, b: f64) -> SpinState {
    let theta = (1.0 - 2.0 * a).acos();
    let (s, c) = (theta / 2.0).sin_cos();
    SpinState([C64::new(c, 0.0), C64::from_polar(s, 2.0 * PI * b)])
}

/// Compton identity on `n` quasi-random on-shell points. Each point takes
/// ten Halton coordinates for the kinematics and four for the two spins.
pub fn compton_check(n: usize, p: &Physics) -> Result<ComptonSummary, CliError> {
    let mut residuals = Vec::with_capacity(n);
    let (mut skipped, mut cancel, mut gauge, mut cross) = (0, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut index = 0u64;
    while residuals.len() < n {
        index += 1;
        let u = halton::<14>(index);
        let kin = match sample_kinematics(u[..10].try_into().expect("ten coordinates")) {
            Ok(k) => k,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let s = spin_from_unit(u[10], u[11]);
        let sp = spin_from_unit(u[12], u[13]);
        let t = ofpt_terms(&kin, &s, &sp)?;
        let a = compton_tensor(&kin, &s, &sp)?;
        let largest = [t.t_a, t.t_b, t.t_c, t.t_d].iter().map(|x| x.norm()).fold(0.0, f64::max);
        residuals.push((t.sum() - a).norm() / a.norm());
        cancel = cancel.max(largest / a.norm());
        gauge = gauge.max(gauge_residual(&kin, &s, &sp, C64::new(1.0, 1.0))?);
        let [da, db] = compton_terms(&kin, &s, &sp)?;
        let [ca, cb] = crossed_terms(&kin, &s, &sp)?;
        cross = cross.max(((da - cb).norm().max((db - ca).norm())) / da.norm().max(db.norm()));
    }
    let mut sorted = residuals.clone();
    sorted.sort_by(f64::total_cmp);
    let p_z = match p.p_z {
        LongitudinalMomentum::Value(v) => v,
        LongitudinalMomentum::Named(_) => tune_longitudinal_momentum(p.k_l)?,
    };
    let channels = channel_amplitudes(p.k_l, p_z)?
        .into_iter()
        .map(|c| ChannelEntry { initial: c.initial, final_spin: c.final_spin, photon: c.photon, amplitude: c.amplitude, weight: c.weight })
        .collect();
    Ok(ComptonSummary {
        samples: n,
        skipped,
        max_relative_residual: sorted[n - 1],
        median_relative_residual: sorted[n / 2],
        tolerance: COMPTON_TOLERANCE,
        above_tolerance: residuals.iter().filter(|&&r| r > COMPTON_TOLERANCE).count(),
        max_cancellation: cancel,
        max_gauge_residual: gauge,
        max_crossing_residual: cross,
        p_z,
        channels,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TuneSummary {
    pub k_l: f64,
    pub p_z: f64,
    pub p_z_minus_one: f64,
    /// `|⟨s↘|C|s↘⟩|²` at unit amplitudes, at the tuned value and at 1.001.
    pub spin_preserving_weight: f64,
    pub spin_preserving_weight_detuned: f64,
}

pub fn tune(k_l: f64) -> Result<TuneSummary, CliError> {
    let p_z = tune_longitudinal_momentum(k_l)?;
    let unit = LaserConfig::standing_wave(k_l, 1.0, 1.0, 0)?;
    Ok(TuneSummary {
        k_l,
        p_z,
        p_z_minus_one: p_z - 1.0,
        spin_preserving_weight: spin_preserving_weight(&unit, p_z)?,
        spin_preserving_weight_detuned: spin_preserving_weight(&unit, 1.001)?,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentSummary {
    #[serde(flatten)]
    pub report: ExperimentReport,
    /// Natural-unit over SI probability; the two intensity conventions
    /// differ by exactly 64π⁴.
    pub convention_ratio: f64,
}

pub fn experiment(cfg: &RunConfig) -> Result<ExperimentSummary, CliError> {
    let report = count_rate(&cfg.experiment)?;
    Ok(ExperimentSummary { convention_ratio: report.probability_natural_units / report.probability, report })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub p_z: Option<f64>,
    pub omega_fit: Option<f64>,
    pub r_squared: Option<f64>,
    pub omega_perturbative: Option<f64>,
    pub purity_at_peak: Option<f64>,
    pub max_norm_drift: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepTable {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
    /// `d log Ω / d log ξ` over rows with a fit; only for the `xi` axis.
    pub loglog_slope: Option<f64>,
}

fn apply_axis(base: &Physics, axis: Axis, v: f64) -> Physics {
    let mut p = base.clone();
    match axis {
        Axis::Xi => {
            p.xi = v;
            p.xi_prime = v;
        }
        Axis::Q2 => p.q2 = v,
        Axis::PZ => p.p_z = LongitudinalMomentum::Value(v),
        Axis::KL => p.k_l = v,
    }
    p
}

fn sweep_row(p: &Physics, value: f64) -> SweepRow {
    let mut row = SweepRow {
        value,
        p_z: None,
        omega_fit: None,
        r_squared: None,
        omega_perturbative: None,
        purity_at_peak: None,
        max_norm_drift: None,
        error: None,
    };
    match simulate(p) {
        Ok(sim) => {
            row.p_z = Some(sim.resolved.p_z);
            row.omega_perturbative = Some(sim.resolved.omega_perturbative);
            row.purity_at_peak = sim.report.purity_at_peak().map(|x| x.1);
            row.max_norm_drift = Some(sim.result.max_norm_drift);
            match sim.fit {
                Ok(f) => {
                    row.omega_fit = Some(f.omega);
                    row.r_squared = Some(f.r_squared);
                }
                Err(e) => row.error = Some(e),
            }
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Independent simulations, one per axis value, on `jobs` worker threads.
/// A failing row records its error and leaves the others running.
pub fn sweep_rows(base: &Physics, sweep: &Sweep, jobs: Option<usize>) -> Result<SweepTable, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs:?} workers: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| {
        sweep.values.par_iter().map(|&v| sweep_row(&apply_axis(base, sweep.axis, v), v)).collect()
    });
    let loglog_slope = match sweep.axis {
        Axis::Xi => loglog_slope(&rows.iter().filter_map(|r| Some((r.value, r.omega_fit?))).collect::<Vec<_>>()),
        _ => None,
    };
    Ok(SweepTable { axis: sweep.axis, rows, loglog_slope })
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["value", "p_z", "omega_fit", "r_squared", "omega_perturbative", "purity_at_peak", "max_norm_drift", "error"])
        .map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize((
            r.value,
            r.p_z,
            r.omega_fit,
            r.r_squared,
            r.omega_perturbative,
            r.purity_at_peak,
            r.max_norm_drift,
            r.error.as_deref(),
        ))
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| csv_error(path, e))
}
