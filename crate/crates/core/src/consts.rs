//! Physical constants (CODATA 2018) and unit conversions.

/// Fine-structure constant.
pub const ALPHA: f64 = 7.297_352_569_3e-3;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Electron rest energy, eV.
pub const ELECTRON_MASS_EV: f64 = 510_998.95;

/// Reduced Compton wavelength ħ/(m c), m.
pub const REDUCED_COMPTON_WAVELENGTH: f64 =
    HBAR * SPEED_OF_LIGHT / (ELECTRON_MASS_EV * ELEMENTARY_CHARGE);

/// Compton time ħ/(m c²), s. One natural time unit.
pub const COMPTON_TIME: f64 = HBAR / (ELECTRON_MASS_EV * ELEMENTARY_CHARGE);

/// Electron charge in natural (Gaussian) units, `e = sqrt(alpha)`.
#[inline]
pub fn charge() -> f64 {
    #[cfg(not(feature = "std"))]
    use num_traits::Float;
    ALPHA.sqrt()
}

/// Converts a time in femtoseconds into units of 1/m.
pub fn fs_to_natural(t_fs: f64) -> f64 {
    t_fs * 1e-15 / COMPTON_TIME
}

/// Converts a time in units of 1/m into femtoseconds.
pub fn natural_to_fs(t: f64) -> f64 {
    t * COMPTON_TIME * 1e15
}

/// Photon energy in eV expressed in units of the electron mass.
pub fn ev_to_natural(energy_ev: f64) -> f64 {
    energy_ev / ELECTRON_MASS_EV
}
