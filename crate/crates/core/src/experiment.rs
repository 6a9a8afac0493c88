//! SI-unit count-rate estimate for an X-ray standing-wave setup.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::consts::{ALPHA, ELECTRON_MASS_EV, ELEMENTARY_CHARGE, HBAR, REDUCED_COMPTON_WAVELENGTH};
use crate::perturbation::short_time_probability;
use crate::{Error, Result};

/// Natural-unit short-time probability over the SI expression at equal
/// inputs. The SI prefactor `α λ_c² / (8π√2)` is `8π²` below the amplitude
/// obtained from `ξ² = 8πα I / (m² ω²)`.
pub const SI_CONVENTION_RATIO: f64 = 64.0 * PI * PI * PI * PI;

const W_PER_CM2: f64 = 1e4;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct OpticalElement {
    pub name: String,
    pub efficiency: f64,
}

impl OpticalElement {
    pub fn new(name: &str, efficiency: f64) -> Self {
        Self { name: name.into(), efficiency }
    }
}

/// Beamline and electron-source parameters, all SI.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct ExperimentConfig {
    /// W.
    pub peak_power: f64,
    /// s.
    pub pulse_duration: f64,
    /// m.
    pub focus_diameter: f64,
    /// eV.
    pub photon_energy: f64,
    /// Elements between the source and the focus, per beam.
    pub optics_chain: [Vec<OpticalElement>; 2],
    /// C.
    pub bunch_charge: f64,
    /// s.
    pub bunch_duration: f64,
    /// Hz.
    pub repetition_rate: f64,
    /// eV.
    pub electron_kinetic_energy: f64,
}

impl Default for ExperimentConfig {
    /// 100 GW, 20 fs, 13 keV focused to 100 nm; 10 fC in 10 ps at 1 MHz and
    /// 212 keV. Beam 1 passes the splitter (34 %) and eight mirrors (85 %),
    /// beam 2 is reflected (56 %), goes through the retarder (55 %) and eight
    /// mirrors.
    fn default() -> Self {
        let mirrors = || vec![OpticalElement::new("mirror", 0.85); 8];
        let mut left = vec![OpticalElement::new("splitter transmission", 0.34)];
        left.extend(mirrors());
        let mut right = vec![
            OpticalElement::new("splitter reflection", 0.56),
            OpticalElement::new("phase retarder", 0.55),
        ];
        right.extend(mirrors());
        Self {
            peak_power: 100e9,
            pulse_duration: 20e-15,
            focus_diameter: 100e-9,
            photon_energy: 13e3,
            optics_chain: [left, right],
            bunch_charge: 10e-15,
            bunch_duration: 10e-12,
            repetition_rate: 1e6,
            electron_kinetic_energy: 212e3,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("peak_power", self.peak_power),
            ("pulse_duration", self.pulse_duration),
            ("focus_diameter", self.focus_diameter),
            ("photon_energy", self.photon_energy),
            ("bunch_charge", self.bunch_charge),
            ("bunch_duration", self.bunch_duration),
            ("repetition_rate", self.repetition_rate),
            ("electron_kinetic_energy", self.electron_kinetic_energy),
        ];
        for (name, v) in named {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(alloc::format!("{name} must be positive and finite, got {v}")));
            }
        }
        for e in self.optics_chain.iter().flatten() {
            if !(e.efficiency > 0.0 && e.efficiency <= 1.0) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "efficiency of {} must lie in (0, 1], got {}",
                    e.name,
                    e.efficiency
                )));
            }
        }
        Ok(())
    }
}

/// Flat-top peak intensity `P / (π (d/2)²)` in W/m².
pub fn focus_intensity(power: f64, focus_diameter: f64) -> f64 {
    power / (PI * (focus_diameter / 2.0).powi(2))
}

fn transmission(chain: &[OpticalElement]) -> f64 {
    chain.iter().map(|e| e.efficiency).product()
}

/// `(I₁, I₂)` at the focus in W/m².
pub fn beam_budget(cfg: &ExperimentConfig) -> (f64, f64) {
    let i0 = focus_intensity(cfg.peak_power, cfg.focus_diameter);
    (i0 * transmission(&cfg.optics_chain[0]), i0 * transmission(&cfg.optics_chain[1]))
}

fn joules(ev: f64) -> f64 {
    ev * ELEMENTARY_CHARGE
}

/// `(α λ_c² / (8π√2) · √(I₁I₂) t / (ħ c k_l))²` with `λ_c = ħ/(m c)` and
/// intensities in W/m².
pub fn diffraction_probability_si(i1: f64, i2: f64, t: f64, photon_energy: f64) -> f64 {
    let pre = ALPHA * REDUCED_COMPTON_WAVELENGTH.powi(2) / (8.0 * PI * 2.0_f64.sqrt());
    let a = pre * (i1 * i2).sqrt() * t / joules(photon_energy);
    a * a
}

/// `ξ = e𝔄/m` of a wave with intensity `I = E₀²/(8π)` (Gaussian units),
/// i.e. `ξ² = 8πα I / (m²ω²)` once `I` is expressed in units of `m⁴`.
pub fn xi_from_intensity(intensity: f64, photon_energy: f64) -> f64 {
    let m = joules(ELECTRON_MASS_EV);
    // W/m² → m⁴ with ħ = c = 1: multiply by λ_c² · (ħ/m) / m.
    let i_nat = intensity * REDUCED_COMPTON_WAVELENGTH.powi(2) * (HBAR / m) / m;
    let omega = photon_energy / ELECTRON_MASS_EV;
    (8.0 * PI * ALPHA * i_nat).sqrt() / omega
}

/// The short-time probability evaluated in natural units from the same
/// SI inputs.
pub fn diffraction_probability_natural(i1: f64, i2: f64, t: f64, photon_energy: f64) -> f64 {
    let k_l = photon_energy / ELECTRON_MASS_EV;
    let t_nat = t * joules(ELECTRON_MASS_EV) / HBAR;
    short_time_probability(xi_from_intensity(i1, photon_energy), xi_from_intensity(i2, photon_energy), k_l, t_nat)
}

/// Every intermediate quantity of the estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExperimentReport {
    pub focus_intensity_w_cm2: f64,
    pub intensity_1_w_cm2: f64,
    pub intensity_2_w_cm2: f64,
    pub xi_1: f64,
    pub xi_2: f64,
    pub probability: f64,
    pub probability_natural_units: f64,
    pub electrons_per_window: f64,
    pub detections_per_second: f64,
    pub longitudinal_momentum_ev: f64,
    pub diffraction_angle_deg: f64,
}

/// `pc = √(T² + 2 T m c²)` in eV.
pub fn momentum_from_kinetic(kinetic: f64) -> f64 {
    (kinetic * kinetic + 2.0 * kinetic * ELECTRON_MASS_EV).sqrt()
}

/// Electrons crossing the focus per pulse, detections per second and the
/// deflection angle `atan(2 k_l / p_z)` in degrees.
pub fn count_rate(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let i0 = focus_intensity(cfg.peak_power, cfg.focus_diameter);
    let (i1, i2) = beam_budget(cfg);
    let probability = diffraction_probability_si(i1, i2, cfg.pulse_duration, cfg.photon_energy);
    let electrons = cfg.bunch_charge / ELEMENTARY_CHARGE * (cfg.pulse_duration / cfg.bunch_duration);
    let pz = momentum_from_kinetic(cfg.electron_kinetic_energy);
    Ok(ExperimentReport {
        focus_intensity_w_cm2: i0 / W_PER_CM2,
        intensity_1_w_cm2: i1 / W_PER_CM2,
        intensity_2_w_cm2: i2 / W_PER_CM2,
        xi_1: xi_from_intensity(i1, cfg.photon_energy),
        xi_2: xi_from_intensity(i2, cfg.photon_energy),
        probability,
        probability_natural_units: diffraction_probability_natural(i1, i2, cfg.pulse_duration, cfg.photon_energy),
        electrons_per_window: electrons,
        detections_per_second: electrons * probability * cfg.repetition_rate,
        longitudinal_momentum_ev: pz,
        diffraction_angle_deg: (2.0 * cfg.photon_energy / pz).atan().to_degrees(),
    })
}
