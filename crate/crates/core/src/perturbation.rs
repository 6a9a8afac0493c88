//! Resonant second-order (absorb one photon, emit one) amplitudes between
//! ladder rungs 0 and 2, the spin matrix `M^{μν}` behind them and its
//! quadratic Taylor expansion, and tuning of the longitudinal momentum that
//! cancels the spin-preserving part.

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::consts::charge;
use crate::dirac::{coupling_block, energy, energy_difference, tilted_spin_basis, Branch, FourVector, Momentum, SpinMatrix2};
use crate::field::{LaserConfig, MomentumLadder};
use crate::{Error, Result, C64};

const SINGULAR: f64 = 1e-12;

/// Momenta in units of m: `q_l = k_l`, `q₂ = k₂`, `q̃₃ = k₃ − 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScaledKinematics {
    pub q_l: f64,
    pub q2: f64,
    pub q3_tilde: f64,
}

impl ScaledKinematics {
    pub fn new(q_l: f64, q2: f64, q3_tilde: f64) -> Result<Self> {
        if !(q_l.is_finite() && q2.is_finite() && q3_tilde.is_finite()) {
            return Err(Error::InvalidArgument("scaled kinematics must be finite".into()));
        }
        Ok(Self { q_l, q2, q3_tilde })
    }

    /// From the photon momentum and the transverse components of `p_i`.
    pub fn from_momenta(k_l: f64, k2: f64, k3: f64) -> Result<Self> {
        Self::new(k_l, k2, k3 - 1.0)
    }

    pub fn k3(&self) -> f64 {
        1.0 + self.q3_tilde
    }

    /// `(k₀, k₁, k₂)`: initial, intermediate and final electron momenta.
    pub fn momenta(&self) -> [Momentum; 3] {
        let (y, z) = (self.q2, self.k3());
        [[-self.q_l, y, z], [0.0, y, z], [self.q_l, y, z]]
    }
}

/// Energy-denominator weights of the four time orderings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prefactors {
    pub f_a: f64,
    pub f_b: f64,
    pub f_c: f64,
    pub f_d: f64,
}

fn inverse(den: f64) -> Result<f64> {
    if den.abs() < SINGULAR {
        return Err(Error::SingularKinematics { denominator: den });
    }
    Ok(1.0 / den)
}

/// `F_a = 1/(ℰ₀ − ℰ₁ + k_l)`, `F_b = 1/(ℰ₀ − ℰ₁ − k_l)`,
/// `F_c = 1/(ℰ₀ + ℰ₁ − k_l)`, `F_d = 1/(ℰ₀ + ℰ₁ + k_l)`.
pub fn prefactors(k0: Momentum, k1: Momentum, k_l: f64) -> Result<Prefactors> {
    let e0 = crate::dirac::relativistic_energy(k0)?;
    let e1 = crate::dirac::relativistic_energy(k1)?;
    let de = energy_difference(k0, k1);
    Ok(Prefactors {
        f_a: inverse(de + k_l)?,
        f_b: inverse(de - k_l)?,
        f_c: inverse(e0 + e1 - k_l)?,
        f_d: inverse(e0 + e1 + k_l)?,
    })
}

/// Sum over the four orderings, `Σ_{s''} F L^μ L^ν`, over spins `(s', s)`.
fn ordered_sum(k: [Momentum; 3], k_l: f64, mu: usize, nu: usize) -> Result<SpinMatrix2> {
    let [k0, k1, k2] = k;
    let f = prefactors(k0, k1, k_l)?;
    let (p, n) = (Branch::Positive, Branch::Negative);
    let up = |m| coupling_block(k2, k1, p, p, m);
    let lo = |m| coupling_block(k1, k0, p, p, m);
    let up_neg = |m| coupling_block(k2, k1, p, n, m);
    let lo_neg = |m| coupling_block(k1, k0, n, p, m);
    Ok(up(mu)? * lo(nu)? * f.f_a
        + up(nu)? * lo(mu)? * f.f_b
        + up_neg(nu)? * lo_neg(mu)? * f.f_c
        + up_neg(mu)? * lo_neg(nu)? * f.f_d)
}

/// Exact `M^{μν}` over `(s', s)`, normalized by `sqrt(ℰ₂ ℰ₀)`.
pub fn spin_matrix_m(kin: &ScaledKinematics, mu: usize, nu: usize) -> Result<SpinMatrix2> {
    if mu > 3 || nu > 3 {
        return Err(Error::InvalidArgument(alloc::format!("Lorentz indices ({mu}, {nu}) out of range")));
    }
    let k = kin.momenta();
    let norm = (energy(k[0]) * energy(k[2])).sqrt();
    Ok(ordered_sum(k, kin.q_l, mu, nu)? * norm)
}

/// Quadratic Taylor polynomial of `M^{μν}` for μ, ν ∈ {2, 3}.
pub fn taylor_m(kin: &ScaledKinematics, mu: usize, nu: usize) -> Result<SpinMatrix2> {
    let (ql, q2, q3) = (kin.q_l, kin.q2, kin.q3_tilde);
    let r2 = 2.0_f64.sqrt();
    let i = C64::new(0.0, 1.0);
    let one = C64::new(1.0, 0.0);
    let m = |c0: C64, cx: C64, cy: C64, cz: C64| SpinMatrix2::from_pauli([c0, cx, cy, cz]);
    let z = C64::new(0.0, 0.0);
    Ok(match (mu, nu) {
        (2, 2) => m(
            one * (1.0 + (r2 - 1.0) / 2.0 * ql * ql - q2 * q2),
            z,
            -i / r2 * ((r2 - 1.0) + (3.0 - 2.0 * r2) / 2.0 * q3) * ql,
            -i / r2 * ql * q2,
        ),
        (2, 3) => m(one * -q2, i * (-0.5 + 0.5 * q3) * ql, i * 0.5 * q2 * ql, -i * 0.5 * ql),
        (3, 2) => m(one * -q2, i * (0.5 - 0.5 * q3) * ql, i * 0.5 * q2 * ql, -i * 0.5 * ql),
        (3, 3) => m(
            one * (-q3 + 0.5 * q3 * q3 + (r2 - 1.0) / 2.0 * ql * ql + 0.5 * q2 * q2),
            z,
            -i / r2 * (-1.0 + (3.0 - 2.0 * r2) / 2.0 * q3) * ql,
            i * (r2 - 1.0) / r2 * q2 * ql,
        ),
        _ => return Err(Error::UnsupportedComponent { mu, nu }),
    })
}

/// Unit polarization direction of a field four-vector.
fn direction(a: &FourVector) -> Result<FourVector> {
    let n = a.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if n == 0.0 {
        return Err(Error::InvalidArgument("polarization vector vanishes".into()));
    }
    Ok(a.scale(C64::new(1.0 / n, 0.0)))
}

/// `Σ_{μν} a'*_μ a_ν X^{μν}` with lowered indices, skipping vanishing components.
fn contract(
    a: &FourVector,
    a_prime: &FourVector,
    mut x: impl FnMut(usize, usize) -> Result<SpinMatrix2>,
) -> Result<SpinMatrix2> {
    let al = a.lower();
    let apl = a_prime.lower();
    let mut acc = SpinMatrix2::zero();
    for mu in 0..4 {
        if apl[mu] == C64::new(0.0, 0.0) {
            continue;
        }
        for nu in 0..4 {
            if al[nu] == C64::new(0.0, 0.0) {
                continue;
            }
            acc = acc + x(mu, nu)? * (apl[mu].conj() * al[nu]);
        }
    }
    Ok(acc)
}

/// `a'*_μ a_ν M^{μν} / (𝔄 𝔄')`: the spin map of the two-photon process.
pub fn contracted_spin_propagation(cfg: &LaserConfig, kin: &ScaledKinematics) -> Result<SpinMatrix2> {
    let a = direction(&cfg.a)?;
    let ap = direction(&cfg.a_prime)?;
    contract(&a, &ap, |mu, nu| spin_matrix_m(kin, mu, nu))
}

/// The resonant `0 → 2` amplitude, growing linearly in time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResonantAmplitude {
    /// Coefficient of `(t − t₀)` before the free phase.
    pub rate: SpinMatrix2,
    pub elapsed: f64,
    /// `e^{−iℰ₀(t − t₀)}`.
    pub phase: C64,
}

impl ResonantAmplitude {
    /// `U^{+,s';+,s}_{2,0}(t, t₀)` over `(s', s)`.
    pub fn matrix(&self) -> SpinMatrix2 {
        self.rate * (self.phase * self.elapsed)
    }

    /// Rabi frequency implied by the linear growth of `⟨s↖|U|s↘⟩`.
    pub fn rabi_frequency(&self) -> f64 {
        let (se, nw) = tilted_spin_basis();
        2.0 * self.rate.matrix_element(&nw, &se).norm()
    }
}

/// `−i (e²/4) a'*_μ a_ν (t − t₀) e^{−iℰ₀(t−t₀)} Σ F L L` between rungs 0 and 2.
pub fn resonant_u20(t: f64, t0: f64, cfg: &LaserConfig, ladder: &MomentumLadder) -> Result<ResonantAmplitude> {
    let k = [ladder.momentum(0)?, ladder.momentum(1)?, ladder.momentum(2)?];
    let (e0, e2) = (energy(k[0]), energy(k[2]));
    if (e2 - e0).abs() > 1e-9 {
        return Err(Error::BraggCondition { mismatch: e2 - e0 });
    }
    let sum = contract(&cfg.a, &cfg.a_prime, |mu, nu| ordered_sum(k, ladder.k_l, mu, nu))?;
    let e = charge();
    let rate = sum * C64::new(0.0, -e * e / 4.0);
    Ok(ResonantAmplitude { rate, elapsed: t - t0, phase: C64::from_polar(1.0, -e0 * (t - t0)) })
}

/// Golden-section search on `[0.999, 1.002]` for the `p_z` at which the
/// two-photon map no longer preserves `s↘`.
pub fn tune_longitudinal_momentum(k_l: f64) -> Result<f64> {
    if !(k_l > 0.0 && k_l.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("k_l must be positive, got {k_l}")));
    }
    let cfg = LaserConfig::standing_wave(k_l, 1.0, 1.0, 0)?;
    tune_in_bracket(&cfg, 0.999, 1.002, 1e-9)
}

/// `|⟨s↘|C(p_z)|s↘⟩|²` for the contracted map `C`.
pub fn spin_preserving_weight(cfg: &LaserConfig, pz: f64) -> Result<f64> {
    let (se, _) = tilted_spin_basis();
    let kin = ScaledKinematics::from_momenta(cfg.k_l, 0.0, pz)?;
    Ok(contracted_spin_propagation(cfg, &kin)?.matrix_element(&se, &se).norm_sqr())
}

fn tune_in_bracket(cfg: &LaserConfig, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let f = |x: f64| spin_preserving_weight(cfg, x);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    let x = 0.5 * (a + b);
    if x - lo < 10.0 * tol || hi - x < 10.0 * tol {
        return Err(Error::NoMinimumInBracket { lo, hi });
    }
    Ok(x)
}

/// `(ξ ξ' k_l t / (8√2))²` with `ξ = e𝔄/m`.
pub fn short_time_probability(xi: f64, xi_prime: f64, k_l: f64, t: f64) -> f64 {
    let a = xi * xi_prime * k_l * t / (8.0 * 2.0_f64.sqrt());
    a * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::spin_filter_matrix;
    use crate::field::standard_kinematics;
    use approx::assert_abs_diff_eq;

    #[test]
    fn prefactor_values() {
        let k = [0.3, 0.0, 1.0];
        let f = prefactors(k, k, 0.0254).unwrap();
        assert_abs_diff_eq!(f.f_a, 1.0 / 0.0254, epsilon = 1e-9);
        assert_abs_diff_eq!(f.f_b, -1.0 / 0.0254, epsilon = 1e-9);
        let f = prefactors([-0.0254, 0.0, 1.000134], [0.0, 0.0, 1.000134], 0.0254).unwrap();
        assert_abs_diff_eq!(f.f_a, 39.0, epsilon = 0.1);
        assert_abs_diff_eq!(f.f_d, 1.0 / (1.414_54 + 1.414_31 + 0.0254), epsilon = 1e-5);
        assert!(matches!(prefactors(k, k, 0.0), Err(Error::SingularKinematics { .. })));
    }

    #[test]
    fn scaled_round_trip() {
        let kin = ScaledKinematics::from_momenta(0.0254, 0.01, 1.000134).unwrap();
        assert_eq!(kin.k3(), 1.0 + (1.000134 - 1.0));
        assert!((kin.k3() - 1.000134).abs() < 1e-15);
        assert!(ScaledKinematics::new(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn leading_orders() {
        let kin = ScaledKinematics::new(1e-7, 0.0, 0.0).unwrap();
        let m22 = spin_matrix_m(&kin, 2, 2).unwrap();
        assert!((m22 - SpinMatrix2::identity()).max_abs() < 1e-6);
        let ql = 1e-4;
        let kin = ScaledKinematics::new(ql, 0.0, 0.0).unwrap();
        let m23 = spin_matrix_m(&kin, 2, 3).unwrap();
        let i = C64::new(0.0, 1.0);
        let want = (SpinMatrix2::pauli(1) + SpinMatrix2::pauli(3)) * (-i * 0.5 * ql);
        assert!((m23 - want).max_abs() < 1e-7);
    }

    #[test]
    fn taylor_examples() {
        let zero = ScaledKinematics::new(0.0, 0.0, 0.0).unwrap();
        assert_eq!(taylor_m(&zero, 2, 2).unwrap(), SpinMatrix2::identity());
        assert!(taylor_m(&zero, 3, 3).unwrap().max_abs() == 0.0);
        let k = ScaledKinematics::new(0.0, 0.1, 0.0).unwrap();
        assert!((taylor_m(&k, 2, 3).unwrap() - SpinMatrix2::identity() * -0.1).max_abs() < 1e-15);
        let ql = 0.0254;
        let k = ScaledKinematics::new(ql, 0.0, 0.0).unwrap();
        let r2 = 2.0_f64.sqrt();
        let want = SpinMatrix2::identity() * ((r2 - 1.0) / 2.0 * ql * ql)
            + SpinMatrix2::pauli(2) * C64::new(0.0, ql / r2);
        assert!((taylor_m(&k, 3, 3).unwrap() - want).max_abs() < 1e-15);
        assert!(matches!(taylor_m(&k, 1, 3), Err(Error::UnsupportedComponent { mu: 1, nu: 3 })));
    }

    #[test]
    fn tuned_map_is_spin_filter() {
        let pz = tune_longitudinal_momentum(0.0254).unwrap();
        assert!((1.27e-4..=1.41e-4).contains(&(pz - 1.0)), "{pz}");
        let cfg = LaserConfig::standing_wave(0.0254, 1.0, 1.0, 0).unwrap();
        let c = contracted_spin_propagation(&cfg, &ScaledKinematics::from_momenta(0.0254, 0.0, pz).unwrap()).unwrap();
        let ms = spin_filter_matrix();
        let (se, nw) = tilted_spin_basis();
        let lambda = c.matrix_element(&nw, &se);
        for i in 0..2 {
            for j in 0..2 {
                let rel = (c[(i, j)] / lambda - ms[(i, j)]).norm() / ms[(i, j)].norm();
                assert!(rel < 1e-3, "({i},{j}) {rel:e}");
            }
        }
        assert!(c.matrix_element(&se, &se).norm() < 1e-3 * c.frobenius_norm());
        let w_at = spin_preserving_weight(&cfg, pz).unwrap();
        let w_off = spin_preserving_weight(&cfg, 1.001).unwrap();
        assert!(w_at.sqrt() <= 1e-3 * w_off.sqrt());
    }

    #[test]
    fn detuning_restores_spin_preserving_part() {
        let cfg = LaserConfig::standing_wave(0.0254, 1.0, 1.0, 0).unwrap();
        let pz = tune_longitudinal_momentum(0.0254).unwrap();
        let kin = ScaledKinematics::from_momenta(0.0254, 0.1, pz).unwrap();
        let (se, _) = tilted_spin_basis();
        let c = contracted_spin_propagation(&cfg, &kin).unwrap();
        assert!(c.matrix_element(&se, &se).norm() > 1e-2 * c.frobenius_norm());
    }

    #[test]
    fn small_photon_momentum_tunes_to_rest() {
        let pz = tune_longitudinal_momentum(1e-3).unwrap();
        assert!((pz - 1.0).abs() < 1e-6, "{pz}");
    }

    #[test]
    fn resonant_amplitude_is_linear() {
        let cfg = LaserConfig::standing_wave(0.0254, 4.74e-3, 4.74e-3, 0).unwrap();
        let l = standard_kinematics(0.0254, Some(1.000134)).unwrap();
        let a = resonant_u20(0.0, 0.0, &cfg, &l).unwrap();
        assert_eq!(a.matrix().max_abs(), 0.0);
        let a1 = resonant_u20(1e5, 0.0, &cfg, &l).unwrap().matrix();
        let a2 = resonant_u20(2e5, 0.0, &cfg, &l).unwrap().matrix();
        assert_abs_diff_eq!(a2.max_abs(), 2.0 * a1.max_abs(), epsilon = 1e-18);
        let bad = MomentumLadder::new([-0.02, 0.0, 1.0], 0.0254, 12).unwrap();
        assert!(matches!(resonant_u20(1.0, 0.0, &cfg, &bad), Err(Error::BraggCondition { .. })));
    }

    #[test]
    fn resonant_rabi_frequency_scale() {
        let cfg = LaserConfig::standing_wave(0.0254, 4.74e-3, 4.74e-3, 0).unwrap();
        let pz = tune_longitudinal_momentum(0.0254).unwrap();
        let l = standard_kinematics(0.0254, Some(pz)).unwrap();
        let w = resonant_u20(1.0, 0.0, &cfg, &l).unwrap().rabi_frequency();
        let approx = 4.74e-3 * 4.74e-3 * 0.0254 / (2.0 * 2.0_f64.sqrt());
        assert!((w / approx - 1.0).abs() < 0.01, "{w:e} vs {approx:e}");
    }

    #[test]
    fn short_time_form() {
        assert_eq!(short_time_probability(0.1, 0.1, 0.0254, 0.0), 0.0);
        let p1 = short_time_probability(0.1, 0.2, 0.0254, 1e3);
        let p2 = short_time_probability(0.1, 0.2, 0.0254, 2e3);
        assert_abs_diff_eq!(p2 / p1, 4.0, epsilon = 1e-12);
    }
}
