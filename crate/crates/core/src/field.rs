//! Standing-wave laser field, its envelope, and the momentum ladder it couples.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::consts::charge;
use crate::dirac::{coupling_block, energy, Branch, FourVector, Momentum, SpinMatrix2, SpinState};
use crate::{Error, Result, C64};

/// Default ladder truncation `|n| <= 12`.
pub const DEFAULT_TRUNCATION: usize = 12;

/// Default ramp length in optical cycles.
pub const DEFAULT_RAMP_CYCLES: u64 = 5;

/// Two counter-propagating beams of photon momentum `k_l` along ∓x.
///
/// `a` belongs to the beam whose photons are absorbed when the electron
/// climbs one rung up the ladder, `a_prime` to the beam that receives the
/// emitted photon. Both are stored contravariant and include the field
/// amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LaserConfig {
    pub k_l: f64,
    pub a: FourVector,
    pub a_prime: FourVector,
    pub ramp_cycles: u64,
    pub plateau_cycles: u64,
}

impl LaserConfig {
    /// Linear z polarization for `a`, circular (y + i z)/√2 for `a_prime`,
    /// with amplitudes given as `ξ = e𝔄/m`.
    pub fn standing_wave(k_l: f64, xi: f64, xi_prime: f64, plateau_cycles: u64) -> Result<Self> {
        if !(k_l > 0.0 && k_l.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!("k_l must be positive, got {k_l}")));
        }
        if !(xi >= 0.0 && xi_prime >= 0.0 && xi.is_finite() && xi_prime.is_finite()) {
            return Err(Error::InvalidArgument("field amplitudes must be finite and non-negative".into()));
        }
        let e = charge();
        let amp = xi / e;
        let amp_p = xi_prime / e / 2.0_f64.sqrt();
        Ok(Self {
            k_l,
            a: FourVector::real(0.0, 0.0, 0.0, amp),
            a_prime: FourVector::new([C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(amp_p, 0.0), C64::new(0.0, amp_p)]),
            ramp_cycles: DEFAULT_RAMP_CYCLES,
            plateau_cycles,
        })
    }

    /// Same field with the plateau chosen so the whole window, ramps
    /// included, lasts `duration` (rounded to whole cycles).
    pub fn with_total_duration(mut self, duration: f64) -> Result<Self> {
        let cycles = (duration / self.period()).round();
        let ramps = 2 * self.ramp_cycles;
        if !(cycles >= ramps as f64) {
            return Err(Error::InvalidArgument(alloc::format!(
                "duration of {cycles} cycles is shorter than the two ramps ({ramps} cycles)"
            )));
        }
        self.plateau_cycles = cycles as u64 - ramps;
        Ok(self)
    }

    pub fn with_ramp_cycles(mut self, ramp_cycles: u64) -> Self {
        self.ramp_cycles = ramp_cycles;
        self
    }

    /// Optical period `2π/k_l`.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.k_l
    }

    pub fn total_cycles(&self) -> u64 {
        2 * self.ramp_cycles + self.plateau_cycles
    }

    pub fn total_duration(&self) -> f64 {
        self.total_cycles() as f64 * self.period()
    }

    /// `e𝔄/m` of the absorbed beam.
    pub fn xi(&self) -> f64 {
        amplitude(&self.a) * charge()
    }

    /// `e𝔄'/m` of the emitting beam.
    pub fn xi_prime(&self) -> f64 {
        amplitude(&self.a_prime) * charge()
    }

    pub fn is_field_free(&self) -> bool {
        amplitude(&self.a) == 0.0 && amplitude(&self.a_prime) == 0.0
    }
}

fn amplitude(a: &FourVector) -> f64 {
    a.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// Electron momenta `k_n = p_i + n k_l x̂` for `|n| <= truncation`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MomentumLadder {
    pub p_i: Momentum,
    pub k_l: f64,
    pub truncation: usize,
}

impl MomentumLadder {
    pub fn new(p_i: Momentum, k_l: f64, truncation: usize) -> Result<Self> {
        if !(k_l > 0.0 && k_l.is_finite()) || !p_i.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidArgument("ladder needs finite momentum and positive k_l".into()));
        }
        Ok(Self { p_i, k_l, truncation })
    }

    pub fn with_truncation(mut self, truncation: usize) -> Self {
        self.truncation = truncation;
        self
    }

    pub fn rungs(&self) -> usize {
        2 * self.truncation + 1
    }

    /// Length of a [`StateVector`](crate::evolution::StateVector): rungs × branches × spins.
    pub fn dim(&self) -> usize {
        4 * self.rungs()
    }

    fn check(&self, n: i32) -> Result<()> {
        if n.unsigned_abs() as usize > self.truncation {
            return Err(Error::IndexOutOfLadder { n, truncation: self.truncation as i32 });
        }
        Ok(())
    }

    pub fn momentum(&self, n: i32) -> Result<Momentum> {
        self.check(n)?;
        Ok(self.momentum_unchecked(n))
    }

    pub(crate) fn momentum_unchecked(&self, n: i32) -> Momentum {
        [self.p_i[0] + n as f64 * self.k_l, self.p_i[1], self.p_i[2]]
    }

    pub fn energy(&self, n: i32) -> Result<f64> {
        Ok(energy(self.momentum(n)?))
    }

    /// Flat index of amplitude `(n, branch, spin)` with spin 0 = ↑, 1 = ↓.
    pub fn index(&self, n: i32, branch: Branch, spin: usize) -> Result<usize> {
        self.check(n)?;
        if spin > 1 {
            return Err(Error::InvalidArgument(alloc::format!("spin index {spin} out of range")));
        }
        let g = match branch {
            Branch::Positive => 0,
            Branch::Negative => 1,
        };
        Ok((((n + self.truncation as i32) as usize) * 2 + g) * 2 + spin)
    }

    /// Inverse of [`index`](Self::index).
    pub fn label(&self, i: usize) -> (i32, Branch, usize) {
        let spin = i % 2;
        let g = (i / 2) % 2;
        let n = (i / 4) as i32 - self.truncation as i32;
        (n, if g == 0 { Branch::Positive } else { Branch::Negative }, spin)
    }

    /// Diagonal of the free Hamiltonian: `+ℰ_{k_n}` on the positive branch,
    /// `−ℰ_{k_n}` on the negative one.
    pub fn free_energies(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| {
                let (n, b, _) = self.label(i);
                b.sign() * energy(self.momentum_unchecked(n))
            })
            .collect()
    }
}

/// Ladder with `p_i = (−k_l, 0, p_z)` so that `k₀` and `k₂` mirror each
/// other in x and are degenerate in energy. `p_z` defaults to 1.
pub fn standard_kinematics(k_l: f64, pz_override: Option<f64>) -> Result<MomentumLadder> {
    if !(k_l > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("k_l must be positive, got {k_l}")));
    }
    MomentumLadder::new([-k_l, 0.0, pz_override.unwrap_or(1.0)], k_l, DEFAULT_TRUNCATION)
}

/// sin² rise over the ramp, flat top, sin² fall. Zero outside the window.
pub fn envelope(t: f64, cfg: &LaserConfig) -> f64 {
    let ramp = cfg.ramp_cycles as f64 * cfg.period();
    let total = cfg.total_duration();
    if !(0.0..=total).contains(&t) {
        return 0.0;
    }
    if ramp == 0.0 {
        return 1.0;
    }
    let edge = t.min(total - t);
    if edge >= ramp {
        1.0
    } else {
        let s = (PI * edge / (2.0 * ramp)).sin();
        s * s
    }
}

/// Coefficients of the nearest-neighbour coupling
/// `V_{ij}(t) = f(t) (minus_{ij} e^{−i k_l t} + plus_{ij} e^{i k_l t})`.
#[derive(Clone, Debug)]
pub struct CouplingEntry {
    pub col: usize,
    pub minus: C64,
    pub plus: C64,
}

/// Sparse interaction matrix over the ladder, split by its two time harmonics.
#[derive(Clone, Debug)]
pub struct CouplingOperator {
    pub k_l: f64,
    pub energies: Vec<f64>,
    pub rows: Vec<Vec<CouplingEntry>>,
}

fn contract(l: &[SpinMatrix2; 4], a: &[C64; 4]) -> SpinMatrix2 {
    (0..4).fold(SpinMatrix2::zero(), |acc, mu| acc + l[mu] * a[mu])
}

/// The two harmonic coefficients of the `(n, n')` coupling block over spin,
/// without the envelope.
fn rung_coefficients(
    n: i32,
    np: i32,
    b: Branch,
    bp: Branch,
    cfg: &LaserConfig,
    ladder: &MomentumLadder,
) -> Result<(SpinMatrix2, SpinMatrix2)> {
    let zero = SpinMatrix2::zero();
    if (n - np).abs() != 1 {
        return Ok((zero, zero));
    }
    let k = ladder.momentum(n)?;
    let kp = ladder.momentum(np)?;
    let mut l = [zero; 4];
    for (mu, slot) in l.iter_mut().enumerate() {
        *slot = coupling_block(k, kp, b, bp, mu)?;
    }
    let pref = C64::new(-charge() / 2.0, 0.0);
    let a = cfg.a.lower();
    let ap = cfg.a_prime.lower();
    let a_conj = a.map(|c| c.conj());
    let ap_conj = ap.map(|c| c.conj());
    if np == n - 1 {
        // climbing: absorb from `a`, emit into `a_prime`
        Ok((contract(&l, &a) * pref, contract(&l, &ap_conj) * pref))
    } else {
        Ok((contract(&l, &ap) * pref, contract(&l, &a_conj) * pref))
    }
}

/// Interaction matrix element between ladder states `(n, γ, s)` and
/// `(n', γ', s')` at time `t`, envelope included.
#[allow(clippy::too_many_arguments)]
pub fn potential_v(
    n: i32,
    np: i32,
    branch: Branch,
    branch_p: Branch,
    s: &SpinState,
    sp: &SpinState,
    t: f64,
    cfg: &LaserConfig,
    ladder: &MomentumLadder,
) -> Result<C64> {
    ladder.momentum(n)?;
    ladder.momentum(np)?;
    let (m, p) = rung_coefficients(n, np, branch, branch_p, cfg, ladder)?;
    let phase = C64::from_polar(1.0, -cfg.k_l * t);
    let block = m * phase + p * phase.conj();
    Ok(block.matrix_element(s, sp) * envelope(t, cfg))
}

impl CouplingOperator {
    pub fn new(cfg: &LaserConfig, ladder: &MomentumLadder) -> Result<Self> {
        if (cfg.k_l - ladder.k_l).abs() > 1e-15 * cfg.k_l {
            return Err(Error::InvalidArgument("laser and ladder photon momenta differ".into()));
        }
        let dim = ladder.dim();
        let mut rows: Vec<Vec<CouplingEntry>> = (0..dim).map(|_| Vec::new()).collect();
        let nmax = ladder.truncation as i32;
        let branches = [Branch::Positive, Branch::Negative];
        for n in -nmax..=nmax {
            for np in [n - 1, n + 1] {
                if np.abs() > nmax {
                    continue;
                }
                for &b in &branches {
                    for &bp in &branches {
                        let (m, p) = rung_coefficients(n, np, b, bp, cfg, ladder)?;
                        for s in 0..2 {
                            for sp in 0..2 {
                                let i = ladder.index(n, b, s)?;
                                let j = ladder.index(np, bp, sp)?;
                                rows[i].push(CouplingEntry { col: j, minus: m[(s, sp)], plus: p[(s, sp)] });
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { k_l: cfg.k_l, energies: ladder.free_energies(), rows })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `out = V(t) x` for the given envelope value.
    pub fn apply(&self, t: f64, env: f64, x: &[C64], out: &mut [C64]) {
        let em = C64::from_polar(env, -self.k_l * t);
        let ep = C64::from_polar(env, self.k_l * t);
        for (o, row) in out.iter_mut().zip(&self.rows) {
            let mut acc = C64::new(0.0, 0.0);
            for e in row {
                acc += (e.minus * em + e.plus * ep) * x[e.col];
            }
            *o = acc;
        }
    }

    /// Entries of `V(t)` in row order, matching the layout of `rows`.
    pub fn fill_values(&self, t: f64, env: f64, out: &mut Vec<C64>) {
        let em = C64::from_polar(env, -self.k_l * t);
        let ep = C64::from_polar(env, self.k_l * t);
        out.clear();
        out.extend(self.rows.iter().flatten().map(|e| e.minus * em + e.plus * ep));
    }

    /// Dense `V(t)` with the given envelope value.
    pub fn dense(&self, t: f64, env: f64) -> crate::linalg::DenseMatrix {
        let mut m = crate::linalg::DenseMatrix::zeros(self.dim());
        let em = C64::from_polar(env, -self.k_l * t);
        let ep = C64::from_polar(env, self.k_l * t);
        for (i, row) in self.rows.iter().enumerate() {
            for e in row {
                m.set(i, e.col, e.minus * em + e.plus * ep);
            }
        }
        m
    }
}
