//! Single-photon Compton amplitudes: the four time-ordered terms and the
//! covariant tensor they sum to.

use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::dirac::{
    bispinor_u, energy, energy_shift, norm3, raw_bispinor, Bispinor, DiracMatrix, FourVector, Momentum,
    SpinState,
};
use crate::{Error, Result, C64};

const ON_SHELL: f64 = 1e-9;
const SINGULAR: f64 = 1e-12;

/// Electron `p_i` absorbs photon `(k, ε)` and emits `(k', ε')`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComptonKinematics {
    pub p_i: Momentum,
    pub k: Momentum,
    pub k_prime: Momentum,
    /// Polarization of the absorbed photon.
    pub eps: FourVector,
    /// Polarization of the emitted photon (enters conjugated).
    pub eps_prime: FourVector,
}

impl ComptonKinematics {
    pub fn new(p_i: Momentum, k: Momentum, k_prime: Momentum, eps: FourVector, eps_prime: FourVector) -> Self {
        Self { p_i, k, k_prime, eps, eps_prime }
    }

    /// Emitted photon along `n̂'` with the length fixed by energy conservation,
    /// `|k'| = p_i·k / ((p_i + k)·(1, n̂'))`.
    pub fn on_shell(p_i: Momentum, k: Momentum, n_prime: Momentum, eps: FourVector, eps_prime: FourVector) -> Result<Self> {
        let nn = norm3(n_prime);
        if !(nn > 0.0 && nn.is_finite()) {
            return Err(Error::InvalidArgument("emission direction must be a nonzero finite vector".into()));
        }
        let n = [n_prime[0] / nn, n_prime[1] / nn, n_prime[2] / nn];
        let pi = FourVector::electron(p_i);
        let kk = FourVector::photon(k);
        let num = pi.dot(&kk).re;
        let den = (pi + kk).dot(&FourVector::real(1.0, n[0], n[1], n[2])).re;
        if den.abs() < SINGULAR {
            return Err(Error::SingularKinematics { denominator: den });
        }
        let w = num / den;
        Ok(Self::new(p_i, k, [w * n[0], w * n[1], w * n[2]], eps, eps_prime))
    }

    pub fn p_f(&self) -> Momentum {
        core::array::from_fn(|i| self.p_i[i] + self.k[i] - self.k_prime[i])
    }

    /// `ℰ_{p_i} + |k| − ℰ_{p_f} − |k'|`.
    pub fn energy_residual(&self) -> f64 {
        energy(self.p_i) + norm3(self.k) - energy(self.p_f()) - norm3(self.k_prime)
    }

    pub fn is_on_shell(&self) -> bool {
        self.energy_residual().abs() < ON_SHELL
    }

    /// Same process with the emitted polarization shifted along its momentum,
    /// `ε'* → ε'* + λ k'`.
    pub fn gauge_shifted(&self, lambda: C64) -> Self {
        let kp = FourVector::photon(self.k_prime);
        Self { eps_prime: self.eps_prime + kp.scale(lambda.conj()), ..*self }
    }
}

/// The four time-ordered contributions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OfptTerms {
    pub t_a: C64,
    pub t_b: C64,
    pub t_c: C64,
    pub t_d: C64,
}

impl OfptTerms {
    pub fn sum(&self) -> C64 {
        self.t_a + self.t_b + self.t_c + self.t_d
    }
}

fn inverse(den: f64) -> Result<f64> {
    if den.abs() < SINGULAR {
        return Err(Error::SingularKinematics { denominator: den });
    }
    Ok(1.0 / den)
}

fn neg(p: Momentum) -> Momentum {
    p.map(|x| -x)
}

/// `Σ_{s''} (ū_f A w^{s''}) (w̄^{s''} B u_i)` over an intermediate spinor family.
fn spin_sum(
    u_f: &Bispinor,
    a: &DiracMatrix,
    q: Momentum,
    negative: bool,
    b: &DiracMatrix,
    u_i: &Bispinor,
) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    let mut weight = 0.0;
    for s in [SpinState::UP, SpinState::DOWN] {
        let (n, w) = raw_bispinor(q, &s, negative);
        weight = n;
        acc += u_f.bar_sandwich(a, &w) * w.bar_sandwich(b, u_i);
    }
    acc * weight
}

/// Time-ordered terms for initial spin `s` and final spin `s_prime`.
///
/// `T_a`: absorb, then emit, through `p_i + k`. `T_b`: emit first, through
/// `p_i − k'`. `T_c`, `T_d`: the same orderings through the negative-energy
/// states.
pub fn ofpt_terms(kin: &ComptonKinematics, s: &SpinState, s_prime: &SpinState) -> Result<OfptTerms> {
    let u_i = bispinor_u(kin.p_i, s)?;
    let u_f = bispinor_u(kin.p_f(), s_prime)?;
    let e_in = kin.eps.slash();
    let e_out = kin.eps_prime.conj().slash();
    let (k, kp) = (norm3(kin.k), norm3(kin.k_prime));
    let q_a: Momentum = core::array::from_fn(|i| kin.p_i[i] + kin.k[i]);
    let q_b: Momentum = core::array::from_fn(|i| kin.p_i[i] - kin.k_prime[i]);
    let (e0, ea, eb) = (energy(kin.p_i), energy(q_a), energy(q_b));
    let f_a = inverse(energy_shift(kin.p_i, kin.k) + k)?;
    let f_b = inverse(energy_shift(kin.p_i, neg(kin.k_prime)) - kp)?;
    let f_c = inverse(e0 + eb - kp)?;
    let f_d = inverse(e0 + ea + k)?;
    Ok(OfptTerms {
        t_a: spin_sum(&u_f, &e_out, q_a, false, &e_in, &u_i) * f_a,
        t_b: spin_sum(&u_f, &e_in, q_b, false, &e_out, &u_i) * f_b,
        t_c: spin_sum(&u_f, &e_in, neg(q_b), true, &e_out, &u_i) * f_c,
        t_d: spin_sum(&u_f, &e_out, neg(q_a), true, &e_in, &u_i) * f_d,
    })
}

/// `ū_f [ε̸'* (p̸+k̸+m)/(2p·k) ε̸ , −ε̸ (p̸−k̸'+m)/(2p·k') ε̸'*] u_i` as two terms,
/// with all four-vectors supplied explicitly.
#[allow(clippy::too_many_arguments)]
pub fn covariant_terms(
    u_f: &Bispinor,
    u_i: &Bispinor,
    p: &FourVector,
    eps: &FourVector,
    k: &FourVector,
    eps_conj_prime: &FourVector,
    k_prime: &FourVector,
) -> Result<[C64; 2]> {
    let one = DiracMatrix::identity();
    let pk = p.dot(k).re;
    let pkp = p.dot(k_prime).re;
    if pk.abs() < SINGULAR {
        return Err(Error::SingularKinematics { denominator: 2.0 * pk });
    }
    if pkp.abs() < SINGULAR {
        return Err(Error::SingularKinematics { denominator: 2.0 * pkp });
    }
    let (e, ec) = (eps.slash(), eps_conj_prime.slash());
    let first = ec * ((*p + *k).slash() + one) * e * C64::new(1.0 / (2.0 * pk), 0.0);
    let second = e * ((*p - *k_prime).slash() + one) * ec * C64::new(-1.0 / (2.0 * pkp), 0.0);
    Ok([u_f.bar_sandwich(&first, u_i), u_f.bar_sandwich(&second, u_i)])
}

fn spinors(kin: &ComptonKinematics, s: &SpinState, s_prime: &SpinState) -> Result<(Bispinor, Bispinor)> {
    Ok((bispinor_u(kin.p_f(), s_prime)?, bispinor_u(kin.p_i, s)?))
}

/// The covariant Compton amplitude. Requires on-shell kinematics.
pub fn compton_tensor(kin: &ComptonKinematics, s: &SpinState, s_prime: &SpinState) -> Result<C64> {
    if !kin.is_on_shell() {
        return Err(Error::OffShell { residual: kin.energy_residual() });
    }
    let [a, b] = compton_terms(kin, s, s_prime)?;
    Ok(a + b)
}

/// The two covariant terms at on-shell four-momenta.
pub fn compton_terms(kin: &ComptonKinematics, s: &SpinState, s_prime: &SpinState) -> Result<[C64; 2]> {
    let (u_f, u_i) = spinors(kin, s, s_prime)?;
    covariant_terms(
        &u_f,
        &u_i,
        &FourVector::electron(kin.p_i),
        &kin.eps,
        &FourVector::photon(kin.k),
        &kin.eps_prime.conj(),
        &FourVector::photon(kin.k_prime),
    )
}

/// The two terms after the crossing `(ε, k) ↔ (ε'*, −k')`.
pub fn crossed_terms(kin: &ComptonKinematics, s: &SpinState, s_prime: &SpinState) -> Result<[C64; 2]> {
    let (u_f, u_i) = spinors(kin, s, s_prime)?;
    let k = FourVector::photon(kin.k);
    let kp = FourVector::photon(kin.k_prime);
    let zero = FourVector::default();
    covariant_terms(
        &u_f,
        &u_i,
        &FourVector::electron(kin.p_i),
        &kin.eps_prime.conj(),
        &(zero - kp),
        &kin.eps,
        &(zero - k),
    )
}

/// Relative change of the summed amplitude under `ε'* → ε'* + λk'`.
pub fn gauge_residual(kin: &ComptonKinematics, s: &SpinState, s_prime: &SpinState, lambda: C64) -> Result<f64> {
    let a = ofpt_terms(kin, s, s_prime)?.sum();
    let b = ofpt_terms(&kin.gauge_shifted(lambda), s, s_prime)?.sum();
    let scale = a.norm().max(lambda.norm() * norm3(kin.k_prime));
    Ok((b - a).norm() / scale.max(f64::MIN_POSITIVE))
}

/// Helicity states of a photon moving along −x.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Helicity {
    Left,
    Right,
}

impl Helicity {
    /// `(0, 0, 1, ±i)/√2`.
    pub fn polarization(self) -> FourVector {
        let r = 1.0 / 2.0_f64.sqrt();
        let z = match self {
            Helicity::Left => C64::new(0.0, r),
            Helicity::Right => C64::new(0.0, -r),
        };
        FourVector::new([C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(r, 0.0), z])
    }
}

pub use crate::dirac::TiltedSpin;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelAmplitude {
    pub initial: TiltedSpin,
    pub final_spin: TiltedSpin,
    pub photon: Helicity,
    pub amplitude: C64,
    /// Share of `Σ|amplitude|²` over the four channels of the same initial spin.
    pub weight: f64,
}

/// Standing-wave kinematics: `p_i = (−k_l, 0, p_z)`, a z-polarized photon
/// absorbed along +x and one emitted along −x with polarization `eps_prime`.
pub fn standing_wave_kinematics(k_l: f64, pz: f64, eps_prime: FourVector) -> ComptonKinematics {
    ComptonKinematics::new(
        [-k_l, 0.0, pz],
        [k_l, 0.0, 0.0],
        [-k_l, 0.0, 0.0],
        FourVector::real(0.0, 0.0, 0.0, 1.0),
        eps_prime,
    )
}

/// Amplitudes for initial `s↘` and `s↖` into each final tilted spin and
/// emitted helicity.
pub fn channel_amplitudes(k_l: f64, pz: f64) -> Result<alloc::vec::Vec<ChannelAmplitude>> {
    let mut out = alloc::vec::Vec::new();
    for initial in [TiltedSpin::SouthEast, TiltedSpin::NorthWest] {
        let start = out.len();
        for photon in [Helicity::Left, Helicity::Right] {
            let kin = standing_wave_kinematics(k_l, pz, photon.polarization());
            for final_spin in [TiltedSpin::SouthEast, TiltedSpin::NorthWest] {
                let amplitude = compton_tensor(&kin, &initial.state(), &final_spin.state())?;
                out.push(ChannelAmplitude { initial, final_spin, photon, amplitude, weight: 0.0 });
            }
        }
        let total: f64 = out[start..].iter().map(|c| c.amplitude.norm_sqr()).sum();
        for c in &mut out[start..] {
            c.weight = if total > 0.0 { c.amplitude.norm_sqr() / total } else { 0.0 };
        }
    }
    Ok(out)
}

/// Maps a point of the unit 10-cube onto generic on-shell kinematics with
/// transverse polarizations; used to drive randomized or quasi-random checks.
pub fn sample_kinematics(u: [f64; 10]) -> Result<ComptonKinematics> {
    let dir = |a: f64, b: f64| -> Momentum {
        let c = 2.0 * a - 1.0;
        let s = (1.0 - c * c).max(0.0).sqrt();
        let phi = 2.0 * PI * b;
        [s * phi.cos(), s * phi.sin(), c]
    };
    let pm = 2.0 * u[0];
    let p = dir(u[1], u[2]).map(|x| x * pm);
    let km = 0.01 + 1.5 * u[3];
    let kd = dir(u[4], u[5]);
    let k = kd.map(|x| x * km);
    let nd = dir(u[6], u[7]);
    let pol = |d: Momentum, a: f64| -> FourVector {
        // any unit vector orthogonal to d, rotated by a, made elliptic
        let t = if d[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let e1 = normalize(cross(d, t));
        let e2 = cross(d, e1);
        let (s, c) = (2.0 * PI * a).sin_cos();
        let ph = C64::from_polar(1.0, PI * a);
        let v: [C64; 3] = core::array::from_fn(|i| C64::new(c * e1[i], 0.0) + ph * (s * e2[i]));
        let n = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        FourVector::new([C64::new(0.0, 0.0), v[0] / n, v[1] / n, v[2] / n])
    };
    ComptonKinematics::on_shell(p, k, nd, pol(kd, u[8]), pol(nd, u[9]))
}

fn cross(a: Momentum, b: Momentum) -> Momentum {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: Momentum) -> Momentum {
    let n = norm3(a);
    a.map(|x| x / n)
}
