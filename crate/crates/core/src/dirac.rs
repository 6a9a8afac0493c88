//! Pauli and Dirac matrices (Dirac representation), free bispinors and the
//! coupling terms `w† γ⁰ γ^μ w'` between ladder states.

use core::ops::{Add, Index, Mul, Neg, Sub};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Minkowski metric diagonal, signature (+,−,−,−).
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// A real 3-momentum in units of m.
pub type Momentum = [f64; 3];

/// Contravariant four-vector with complex components.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FourVector(pub [C64; 4]);

impl FourVector {
    pub const fn new(c: [C64; 4]) -> Self {
        Self(c)
    }

    pub fn real(t: f64, x: f64, y: f64, z: f64) -> Self {
        Self([t.into(), x.into(), y.into(), z.into()])
    }

    /// On-shell electron four-momentum `(ℰ_p, p)`.
    pub fn electron(p: Momentum) -> Self {
        Self::real(energy(p), p[0], p[1], p[2])
    }

    /// Light-like photon four-momentum `(|k|, k)`.
    pub fn photon(k: Momentum) -> Self {
        Self::real(norm3(k), k[0], k[1], k[2])
    }

    /// Covariant components `a_μ = g_μν a^ν`.
    pub fn lower(&self) -> [C64; 4] {
        core::array::from_fn(|mu| self.0[mu] * METRIC[mu])
    }

    /// Bilinear Minkowski product (no complex conjugation).
    pub fn dot(&self, other: &Self) -> C64 {
        (0..4).map(|mu| self.0[mu] * other.0[mu] * METRIC[mu]).sum()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.map(|c| c.conj()))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.map(|c| c * s))
    }

    /// Feynman slash `a_μ γ^μ`.
    pub fn slash(&self) -> DiracMatrix {
        let low = self.lower();
        (0..4).fold(DiracMatrix::zero(), |acc, mu| acc + DiracMatrix::gamma(mu) * low[mu])
    }
}

impl Index<usize> for FourVector {
    type Output = C64;
    fn index(&self, mu: usize) -> &C64 {
        &self.0[mu]
    }
}

impl Add for FourVector {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(core::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for FourVector {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(core::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

/// Two-component Pauli spinor χ.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpinState(pub [C64; 2]);

impl SpinState {
    pub const UP: Self = Self([ONE, ZERO]);
    pub const DOWN: Self = Self([ZERO, ONE]);

    /// Normalizes `(a, b)`; rejects a null or non-finite vector.
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::InvalidArgument("spin state must be finite and nonzero".into()));
        }
        Ok(Self([a / n, b / n]))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }
}

impl Index<usize> for SpinState {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

/// Four-component bispinor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bispinor(pub [C64; 4]);

impl Bispinor {
    /// `self† other`.
    pub fn dagger_dot(&self, other: &Self) -> C64 {
        (0..4).map(|i| self.0[i].conj() * other.0[i]).sum()
    }

    /// `self† M other`.
    pub fn sandwich(&self, m: &DiracMatrix, other: &Self) -> C64 {
        self.dagger_dot(&m.apply(other))
    }

    /// `ū M other` with `ū = u† γ⁰`.
    pub fn bar_sandwich(&self, m: &DiracMatrix, other: &Self) -> C64 {
        self.sandwich(&(DiracMatrix::gamma(0) * *m), other)
    }

    /// Outer product `self other̄`.
    pub fn outer_bar(&self, other: &Self) -> DiracMatrix {
        let bar = DiracMatrix::gamma(0).apply(other);
        DiracMatrix(core::array::from_fn(|i| core::array::from_fn(|j| self.0[i] * bar.0[j].conj())))
    }
}

/// 2×2 complex matrix over the spin indices.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpinMatrix2(pub [[C64; 2]; 2]);

impl SpinMatrix2 {
    pub const fn zero() -> Self {
        Self([[ZERO; 2]; 2])
    }

    pub const fn identity() -> Self {
        Self([[ONE, ZERO], [ZERO, ONE]])
    }

    /// Pauli matrix σ_i for i ∈ {1, 2, 3}; σ_0 is the identity.
    pub fn pauli(i: usize) -> Self {
        match i {
            0 => Self::identity(),
            1 => Self([[ZERO, ONE], [ONE, ZERO]]),
            2 => Self([[ZERO, -I], [I, ZERO]]),
            3 => Self([[ONE, ZERO], [ZERO, -ONE]]),
            _ => panic!("Pauli index {i} out of range"),
        }
    }

    /// `σ·k`.
    pub fn sigma_dot(k: Momentum) -> Self {
        (1..4).fold(Self::zero(), |acc, i| acc + Self::pauli(i) * C64::from(k[i - 1]))
    }

    /// `c₀𝟙 + c_x σ_x + c_y σ_y + c_z σ_z`.
    pub fn from_pauli(c: [C64; 4]) -> Self {
        (0..4).fold(Self::zero(), |acc, i| acc + Self::pauli(i) * c[i])
    }

    /// Coefficients `(c₀, c_x, c_y, c_z)`, `c_i = tr(σ_i M)/2`.
    pub fn pauli_decompose(&self) -> [C64; 4] {
        let m = &self.0;
        [
            (m[0][0] + m[1][1]) * 0.5,
            (m[0][1] + m[1][0]) * 0.5,
            (m[0][1] - m[1][0]) * I * 0.5,
            (m[0][0] - m[1][1]) * 0.5,
        ]
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &SpinState, bra: &SpinState) -> Self {
        Self(core::array::from_fn(|i| core::array::from_fn(|j| ket.0[i] * bra.0[j].conj())))
    }

    pub fn apply(&self, s: &SpinState) -> SpinState {
        SpinState(core::array::from_fn(|i| self.0[i][0] * s.0[0] + self.0[i][1] * s.0[1]))
    }

    /// `⟨bra|self|ket⟩`.
    pub fn matrix_element(&self, bra: &SpinState, ket: &SpinState) -> C64 {
        bra.inner(&self.apply(ket))
    }

    pub fn adjoint(&self) -> Self {
        Self(core::array::from_fn(|i| core::array::from_fn(|j| self.0[j][i].conj())))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self(self.0.map(|r| r.map(&f)))
    }
}

impl Index<(usize, usize)> for SpinMatrix2 {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.0[i][j]
    }
}

impl Add for SpinMatrix2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(core::array::from_fn(|i| core::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }
}

impl Sub for SpinMatrix2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for SpinMatrix2 {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|c| -c)
    }
}

impl Mul for SpinMatrix2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self(core::array::from_fn(|i| {
            core::array::from_fn(|j| self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j])
        }))
    }
}

impl Mul<C64> for SpinMatrix2 {
    type Output = Self;
    fn mul(self, s: C64) -> Self {
        self.map(|c| c * s)
    }
}

impl Mul<f64> for SpinMatrix2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.map(|c| c * s)
    }
}

/// 4×4 complex matrix acting on bispinors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiracMatrix(pub [[C64; 4]; 4]);

impl DiracMatrix {
    pub const fn zero() -> Self {
        Self([[ZERO; 4]; 4])
    }

    pub fn identity() -> Self {
        Self(core::array::from_fn(|i| core::array::from_fn(|j| if i == j { ONE } else { ZERO })))
    }

    /// Assembles `[[a, b], [c, d]]` from 2×2 blocks.
    pub fn from_blocks(a: SpinMatrix2, b: SpinMatrix2, c: SpinMatrix2, d: SpinMatrix2) -> Self {
        let mut m = Self::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = a.0[i][j];
                m.0[i][j + 2] = b.0[i][j];
                m.0[i + 2][j] = c.0[i][j];
                m.0[i + 2][j + 2] = d.0[i][j];
            }
        }
        m
    }

    /// `β = γ⁰`.
    pub fn beta() -> Self {
        let one = SpinMatrix2::identity();
        Self::from_blocks(one, SpinMatrix2::zero(), SpinMatrix2::zero(), -one)
    }

    /// `α_i` for i ∈ {1, 2, 3}.
    pub fn alpha(i: usize) -> Self {
        let s = SpinMatrix2::pauli(i);
        Self::from_blocks(SpinMatrix2::zero(), s, s, SpinMatrix2::zero())
    }

    /// `γ^μ` with `γ⁰ = β`, `γ^i = β α_i`.
    pub fn gamma(mu: usize) -> Self {
        match mu {
            0 => Self::beta(),
            1..=3 => Self::beta() * Self::alpha(mu),
            _ => panic!("Lorentz index {mu} out of range"),
        }
    }

    /// `γ⁰ γ^μ`: the identity for μ = 0 and `α_μ` otherwise.
    pub fn gamma0_gamma(mu: usize) -> Self {
        match mu {
            0 => Self::identity(),
            _ => Self::alpha(mu),
        }
    }

    pub fn apply(&self, w: &Bispinor) -> Bispinor {
        Bispinor(core::array::from_fn(|i| (0..4).map(|j| self.0[i][j] * w.0[j]).sum()))
    }

    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let mut m = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                m = m.max((self.0[i][j] - o.0[i][j]).norm());
            }
        }
        m
    }
}

impl Add for DiracMatrix {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self(core::array::from_fn(|i| core::array::from_fn(|j| self.0[i][j] + o.0[i][j])))
    }
}

impl Sub for DiracMatrix {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self(core::array::from_fn(|i| core::array::from_fn(|j| self.0[i][j] - o.0[i][j])))
    }
}

impl Mul for DiracMatrix {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self(core::array::from_fn(|i| {
            core::array::from_fn(|j| (0..4).map(|k| self.0[i][k] * o.0[k][j]).sum())
        }))
    }
}

impl Mul<C64> for DiracMatrix {
    type Output = Self;
    fn mul(self, s: C64) -> Self {
        Self(self.0.map(|r| r.map(|c| c * s)))
    }
}

/// Energy branch of a ladder state: `+` uses `u_{k}`, `−` uses `v_{−k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }
}

pub(crate) fn norm3(k: Momentum) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

#[inline]
pub(crate) fn energy(k: Momentum) -> f64 {
    (1.0 + k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
}

/// `ℰ_a − ℰ_b` without cancellation: `(a − b)·(a + b) / (ℰ_a + ℰ_b)`.
pub(crate) fn energy_difference(a: Momentum, b: Momentum) -> f64 {
    let num: f64 = (0..3).map(|i| (a[i] - b[i]) * (a[i] + b[i])).sum();
    num / (energy(a) + energy(b))
}

/// `ℰ_p − ℰ_{p+d}` from the shift `d` itself, so a small `d` keeps its digits.
pub(crate) fn energy_shift(p: Momentum, d: Momentum) -> f64 {
    let q: Momentum = core::array::from_fn(|i| p[i] + d[i]);
    let num: f64 = (0..3).map(|i| d[i] * (2.0 * p[i] + d[i])).sum();
    -num / (energy(p) + energy(q))
}

fn check_finite(k: Momentum) -> Result<()> {
    if k.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("momentum components must be finite".into()))
    }
}

/// `ℰ_k = sqrt(1 + |k|²)`.
pub fn relativistic_energy(k: Momentum) -> Result<f64> {
    check_finite(k)?;
    Ok(energy(k))
}

fn bispinor_parts(k: Momentum, s: &SpinState) -> (f64, SpinState, SpinState) {
    let e = energy(k);
    let pref = (1.0 / e).sqrt() * ((e + 1.0) / 2.0).sqrt();
    let small = SpinMatrix2::sigma_dot(k).apply(s);
    let small = SpinState(small.0.map(|c| c / (e + 1.0)));
    (pref, *s, small)
}

/// Positive-energy bispinor normalized to `u†u = 1`.
pub fn bispinor_u(k: Momentum, s: &SpinState) -> Result<Bispinor> {
    check_finite(k)?;
    let (f, big, small) = bispinor_parts(k, s);
    Ok(Bispinor([big[0] * f, big[1] * f, small[0] * f, small[1] * f]))
}

/// Negative-energy bispinor normalized to `v†v = 1`.
pub fn bispinor_v(k: Momentum, s: &SpinState) -> Result<Bispinor> {
    check_finite(k)?;
    let (f, big, small) = bispinor_parts(k, s);
    Ok(Bispinor([small[0] * f, small[1] * f, big[0] * f, big[1] * f]))
}

/// `u_k` (or `v_k` when `negative`) without its normalization, together with
/// the squared normalization `(ℰ+1)/(2ℰ)`.
pub(crate) fn raw_bispinor(k: Momentum, s: &SpinState, negative: bool) -> (f64, Bispinor) {
    let e = energy(k);
    let small = SpinMatrix2::sigma_dot(k).apply(s);
    let small = small.0.map(|c| c / (e + 1.0));
    let w = (e + 1.0) / (2.0 * e);
    if negative {
        (w, Bispinor([small[0], small[1], s[0], s[1]]))
    } else {
        (w, Bispinor([s[0], s[1], small[0], small[1]]))
    }
}

/// Ladder wavefunction: `u_k` on the positive branch, `v_{−k}` on the negative one.
pub fn ladder_spinor(k: Momentum, branch: Branch, s: &SpinState) -> Result<Bispinor> {
    match branch {
        Branch::Positive => bispinor_u(k, s),
        Branch::Negative => bispinor_v([-k[0], -k[1], -k[2]], s),
    }
}

/// `w† γ⁰ γ^μ w'` with `w`, `w'` the ladder spinors of `(k, γ, s)` and `(k', γ', s')`.
pub fn coupling_l(
    k: Momentum,
    kp: Momentum,
    branch: Branch,
    branch_p: Branch,
    s: &SpinState,
    sp: &SpinState,
    mu: usize,
) -> Result<C64> {
    if mu > 3 {
        return Err(Error::InvalidArgument(alloc::format!("Lorentz index {mu} out of range")));
    }
    let w = ladder_spinor(k, branch, s)?;
    let wp = ladder_spinor(kp, branch_p, sp)?;
    Ok(w.sandwich(&DiracMatrix::gamma0_gamma(mu), &wp))
}

/// Coupling over the ↑/↓ basis: entry `(s, s')` is `coupling_l(.., χ_s, χ_s', μ)`.
pub fn coupling_block(k: Momentum, kp: Momentum, branch: Branch, branch_p: Branch, mu: usize) -> Result<SpinMatrix2> {
    let basis = [SpinState::UP, SpinState::DOWN];
    let mut m = SpinMatrix2::zero();
    for (i, s) in basis.iter().enumerate() {
        for (j, sp) in basis.iter().enumerate() {
            m.0[i][j] = coupling_l(k, kp, branch, branch_p, s, sp, mu)?;
        }
    }
    Ok(m)
}

/// The tilted pair `(s↘, s↖)` at angles 11π/8 and 15π/8.
pub fn tilted_spin_basis() -> (SpinState, SpinState) {
    use core::f64::consts::PI;
    let th_se = 11.0 * PI / 8.0;
    let th_nw = 15.0 * PI / 8.0;
    (
        SpinState([th_se.cos().into(), th_se.sin().into()]),
        SpinState([th_nw.cos().into(), th_nw.sin().into()]),
    )
}

/// The same pair from its closed algebraic form.
pub fn tilted_spin_basis_algebraic() -> (SpinState, SpinState) {
    let r2 = 2.0_f64.sqrt();
    let a = (2.0 - r2).sqrt() / 2.0;
    let b = (2.0 + r2).sqrt() / 2.0;
    (SpinState([(-a).into(), (-b).into()]), SpinState([b.into(), (-a).into()]))
}

/// Tilted spin label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TiltedSpin {
    SouthEast,
    NorthWest,
}

impl TiltedSpin {
    pub fn state(self) -> SpinState {
        let (se, nw) = tilted_spin_basis();
        match self {
            TiltedSpin::SouthEast => se,
            TiltedSpin::NorthWest => nw,
        }
    }
}


/// `M_s = s↖ s↘†`, which annihilates `s↖` and raises `s↘` to `s↖`.
pub fn spin_filter_matrix() -> SpinMatrix2 {
    let r2 = 2.0_f64.sqrt();
    let f = 1.0 / 8.0_f64.sqrt();
    SpinMatrix2([
        [(-f).into(), ((-1.0 - r2) * f).into()],
        [((-1.0 + r2) * f).into(), f.into()],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const K0: Momentum = [-0.0254, 0.0, 1.000134];

    #[test]
    fn energies() {
        assert_eq!(relativistic_energy([0.0; 3]).unwrap(), 1.0);
        assert_abs_diff_eq!(relativistic_energy([0.0, 0.0, 1.0]).unwrap(), 2.0_f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(relativistic_energy(K0).unwrap(), 1.41454, epsilon = 1e-5);
        assert!(relativistic_energy([f64::NAN, 0.0, 0.0]).is_err());
        assert!(relativistic_energy([0.0, f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn rest_frame_spinors() {
        let u = bispinor_u([0.0; 3], &SpinState::UP).unwrap();
        assert_eq!(u.0, [ONE, ZERO, ZERO, ZERO]);
        let v = bispinor_v([0.0; 3], &SpinState::DOWN).unwrap();
        assert_eq!(v.0, [ZERO, ZERO, ZERO, ONE]);
    }

    #[test]
    fn spinor_orthonormality() {
        let (se, nw) = tilted_spin_basis();
        for k in [K0, [0.3, -1.2, 0.4]] {
            for f in [bispinor_u, bispinor_v] {
                let a = f(k, &se).unwrap();
                let b = f(k, &nw).unwrap();
                assert_abs_diff_eq!(a.dagger_dot(&a).re, 1.0, epsilon = 1e-14);
                assert_abs_diff_eq!(b.dagger_dot(&b).re, 1.0, epsilon = 1e-14);
                assert!(a.dagger_dot(&b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn coupling_trivial_cases() {
        let k = K0;
        let p = Branch::Positive;
        let l = coupling_l(k, k, p, p, &SpinState::UP, &SpinState::UP, 0).unwrap();
        assert_abs_diff_eq!(l.re, 1.0, epsilon = 1e-14);
        assert!(l.im.abs() < 1e-14);
        let l = coupling_l(k, k, p, p, &SpinState::UP, &SpinState::DOWN, 0).unwrap();
        assert!(l.norm() < 1e-14);
        assert!(coupling_l(k, k, p, p, &SpinState::UP, &SpinState::UP, 4).is_err());
    }

    #[test]
    fn pauli_algebra() {
        // σ_i σ_j = δ_ij 𝟙 + i ε_ijk σ_k
        let eps = |i: usize, j: usize, k: usize| -> f64 {
            match (i, j, k) {
                (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1.0,
                (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1.0,
                _ => 0.0,
            }
        };
        for i in 1..4 {
            for j in 1..4 {
                let lhs = SpinMatrix2::pauli(i) * SpinMatrix2::pauli(j);
                let mut rhs = SpinMatrix2::identity() * if i == j { 1.0 } else { 0.0 };
                for k in 1..4 {
                    rhs = rhs + SpinMatrix2::pauli(k) * (I * eps(i, j, k));
                }
                assert!((lhs - rhs).max_abs() < 1e-15, "σ{i}σ{j}");
            }
        }
    }

    #[test]
    fn clifford_algebra() {
        for mu in 0..4 {
            for nu in 0..4 {
                let a = DiracMatrix::gamma(mu) * DiracMatrix::gamma(nu)
                    + DiracMatrix::gamma(nu) * DiracMatrix::gamma(mu);
                let g = if mu == nu { 2.0 * METRIC[mu] } else { 0.0 };
                let want = DiracMatrix::identity() * C64::from(g);
                assert!(a.max_abs_diff(&want) < 1e-15, "{{γ{mu}, γ{nu}}}");
            }
        }
    }

    #[test]
    fn gamma0_gamma_matches_product() {
        for mu in 0..4 {
            let p = DiracMatrix::gamma(0) * DiracMatrix::gamma(mu);
            assert!(p.max_abs_diff(&DiracMatrix::gamma0_gamma(mu)) < 1e-15);
        }
    }

    #[test]
    fn tilted_basis_forms_agree() {
        let (se, nw) = tilted_spin_basis();
        let (se2, nw2) = tilted_spin_basis_algebraic();
        for i in 0..2 {
            assert!((se[i] - se2[i]).norm() < 1e-12);
            assert!((nw[i] - nw2[i]).norm() < 1e-12);
        }
        assert_abs_diff_eq!(se[0].re, -0.382683, epsilon = 1e-6);
        assert_abs_diff_eq!(se[1].re, -0.923880, epsilon = 1e-6);
        assert_abs_diff_eq!(nw[0].re, 0.923880, epsilon = 1e-6);
        assert_abs_diff_eq!(nw[1].re, -0.382683, epsilon = 1e-6);
        assert!(se.inner(&nw).norm() < 1e-15);
    }

    #[test]
    fn spin_filter_matrix_action() {
        let (se, nw) = tilted_spin_basis();
        let m = spin_filter_matrix();
        assert_abs_diff_eq!(m[(0, 0)].re, -0.353553, epsilon = 1e-6);
        assert!((m - SpinMatrix2::outer(&nw, &se)).max_abs() < 1e-12);
        let a = m.apply(&nw);
        assert!(a.norm_sqr() < 1e-24);
        let b = m.apply(&se);
        assert!((b[0] - nw[0]).norm() < 1e-12 && (b[1] - nw[1]).norm() < 1e-12);
        assert_abs_diff_eq!(m.matrix_element(&nw, &se).re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pauli_round_trip() {
        let m = SpinMatrix2([[C64::new(0.3, -1.0), C64::new(2.0, 0.5)], [C64::new(-0.7, 0.1), C64::new(1.5, 1.5)]]);
        let back = SpinMatrix2::from_pauli(m.pauli_decompose());
        assert!((back - m).max_abs() < 1e-15);
        let c = SpinMatrix2::pauli(2).pauli_decompose();
        assert_eq!(c, [ZERO, ZERO, ONE, ZERO]);
    }

    #[test]
    fn slash_squares_to_mass_shell() {
        let p = FourVector::electron([0.2, -0.4, 1.1]);
        let sq = p.slash() * p.slash();
        assert!(sq.max_abs_diff(&(DiracMatrix::identity() * p.dot(&p))) < 1e-13);
        assert_abs_diff_eq!(p.dot(&p).re, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn spinor_invalid_state() {
        assert!(SpinState::new(ZERO, ZERO).is_err());
        let s = SpinState::new(C64::new(3.0, 0.0), C64::new(0.0, 4.0)).unwrap();
        assert_abs_diff_eq!(s.norm_sqr(), 1.0, epsilon = 1e-15);
    }
}
