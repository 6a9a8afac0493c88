//! Spin matrix M and spin sums checked against a from-scratch evaluation
//! that uses plain arrays only: its own Pauli and Dirac matrices, its own
//! spinors and its own time-ordering sum.

use kdspin_core::dirac::{bispinor_u, bispinor_v, SpinState};
use kdspin_core::perturbation::{spin_matrix_m, ScaledKinematics};
use num_complex::Complex64 as C;
use proptest::prelude::*;

type M4 = [[C; 4]; 4];
type V4 = [C; 4];

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

fn pauli(i: usize) -> [[C; 2]; 2] {
    let (o, z, im) = (c(1.0), c(0.0), C::new(0.0, 1.0));
    match i {
        0 => [[z, o], [o, z]],
        1 => [[z, -im], [im, z]],
        _ => [[o, z], [z, -o]],
    }
}

/// γ⁰γ^μ in the Dirac representation: 𝟙 for μ = 0, α_i otherwise.
fn g0g(mu: usize) -> M4 {
    let mut m = [[c(0.0); 4]; 4];
    if mu == 0 {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = c(1.0);
        }
        return m;
    }
    let s = pauli(mu - 1);
    for i in 0..2 {
        for j in 0..2 {
            m[i][j + 2] = s[i][j];
            m[i + 2][j] = s[i][j];
        }
    }
    m
}

fn gamma0() -> M4 {
    let mut m = [[c(0.0); 4]; 4];
    for i in 0..4 {
        m[i][i] = c(if i < 2 { 1.0 } else { -1.0 });
    }
    m
}

fn en(p: [f64; 3]) -> f64 {
    (1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// `(σ·p χ_s) / (ℰ + 1)` together with `χ_s`.
fn halves(p: [f64; 3], s: usize) -> ([C; 2], [C; 2]) {
    let chi = if s == 0 { [c(1.0), c(0.0)] } else { [c(0.0), c(1.0)] };
    let mut sp = [[c(0.0); 2]; 2];
    for (k, pk) in p.iter().enumerate() {
        let sk = pauli(k);
        for i in 0..2 {
            for j in 0..2 {
                sp[i][j] += sk[i][j] * *pk;
            }
        }
    }
    let e = en(p);
    let low = [(sp[0][0] * chi[0] + sp[0][1] * chi[1]) / (e + 1.0), (sp[1][0] * chi[0] + sp[1][1] * chi[1]) / (e + 1.0)];
    (chi, low)
}

fn u(p: [f64; 3], s: usize) -> V4 {
    let f = ((en(p) + 1.0) / (2.0 * en(p))).sqrt();
    let (a, b) = halves(p, s);
    [a[0] * f, a[1] * f, b[0] * f, b[1] * f]
}

fn v(p: [f64; 3], s: usize) -> V4 {
    let f = ((en(p) + 1.0) / (2.0 * en(p))).sqrt();
    let (a, b) = halves(p, s);
    [b[0] * f, b[1] * f, a[0] * f, a[1] * f]
}

fn neg(p: [f64; 3]) -> [f64; 3] {
    [-p[0], -p[1], -p[2]]
}

fn sandwich(w: &V4, m: &M4, x: &V4) -> C {
    let mut acc = c(0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += w[i].conj() * m[i][j] * x[j];
        }
    }
    acc
}

/// Direct evaluation of the four-ordering sum for `M^{μν}_{s',s}`.
fn oracle_m(ql: f64, q2: f64, q3: f64, mu: usize, nu: usize) -> [[C; 2]; 2] {
    let z = 1.0 + q3;
    let (k0, k1, k2) = ([-ql, q2, z], [0.0, q2, z], [ql, q2, z]);
    let (e0, e1, e2) = (en(k0), en(k1), en(k2));
    // |k₀|² − |k₁|² = q_l², written out so small q_l keeps its digits
    let de = ql * ql / (e0 + e1);
    let fa = 1.0 / (de + ql);
    let fb = 1.0 / (de - ql);
    let fc = 1.0 / (e0 + e1 - ql);
    let fd = 1.0 / (e0 + e1 + ql);
    let mut out = [[c(0.0); 2]; 2];
    for sp in 0..2 {
        for s in 0..2 {
            let mut acc = c(0.0);
            for m in 0..2 {
                let up = |l| sandwich(&u(k2, sp), &g0g(l), &u(k1, m));
                let lo = |l| sandwich(&u(k1, m), &g0g(l), &u(k0, s));
                let up_n = |l| sandwich(&u(k2, sp), &g0g(l), &v(neg(k1), m));
                let lo_n = |l| sandwich(&v(neg(k1), m), &g0g(l), &u(k0, s));
                acc += up(mu) * lo(nu) * fa + up(nu) * lo(mu) * fb + up_n(nu) * lo_n(mu) * fc + up_n(mu) * lo_n(nu) * fd;
            }
            out[sp][s] = acc * (e0 * e2).sqrt();
        }
    }
    out
}

#[test]
fn m_matches_oracle_for_tiny_photon_momentum() {
    let o = oracle_m(1e-6, 0.0, 0.0, 2, 2);
    let m = spin_matrix_m(&ScaledKinematics::new(1e-6, 0.0, 0.0).unwrap(), 2, 2).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            assert!((o[i][j] - m[(i, j)]).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn m_matches_oracle(ql in 1e-3f64..0.3, q2 in -0.2f64..0.2, q3 in -0.2f64..0.2, mu in 0usize..4, nu in 0usize..4) {
        let m = spin_matrix_m(&ScaledKinematics::new(ql, q2, q3).unwrap(), mu, nu).unwrap();
        let o = oracle_m(ql, q2, q3, mu, nu);
        for i in 0..2 {
            for j in 0..2 {
                let err = (o[i][j] - m[(i, j)]).norm();
                prop_assert!(err < 1e-12, "M^{}{}[{}][{}]: {:e}", mu, nu, i, j, err);
            }
        }
    }
}

fn outer_bar_sum(ws: [V4; 2]) -> M4 {
    let g0 = gamma0();
    let mut m = [[c(0.0); 4]; 4];
    for w in ws {
        for i in 0..4 {
            for j in 0..4 {
                let bar_j: C = (0..4).map(|k| w[k].conj() * g0[k][j]).sum();
                m[i][j] += w[i] * bar_j;
            }
        }
    }
    m
}

/// `(±p̸ + m)/(2ℰ)` from its definition; `sign = −1` gives `(p̸ − m)`.
fn projector(p: [f64; 3], sign: f64) -> M4 {
    let e = en(p);
    let g0 = gamma0();
    let mut m = [[c(0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut x = g0[i][j] * e + if i == j { c(sign) } else { c(0.0) };
            for k in 0..3 {
                // γ^k = γ⁰ α_k, enters with −p_k from the metric
                let gk: C = (0..4).map(|l| g0[i][l] * g0g(k + 1)[l][j]).sum();
                x -= gk * p[k];
            }
            m[i][j] = x / (2.0 * e);
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn spin_sums_are_projectors(r in 0.0f64..2.0, ct in -1.0f64..1.0, phi in 0.0f64..std::f64::consts::TAU) {
        let st = (1.0 - ct * ct).sqrt();
        let p = [r * st * phi.cos(), r * st * phi.sin(), r * ct];
        let lib = |f: fn([f64; 3], &SpinState) -> kdspin_core::Result<kdspin_core::dirac::Bispinor>| -> [V4; 2] {
            [SpinState::UP, SpinState::DOWN].map(|s| f(p, &s).unwrap().0)
        };
        let su = outer_bar_sum(lib(bispinor_u));
        let sv = outer_bar_sum(lib(bispinor_v));
        let (pu, pv) = (projector(p, 1.0), projector(p, -1.0));
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((su[i][j] - pu[i][j]).norm() < 1e-12);
                prop_assert!((sv[i][j] - pv[i][j]).norm() < 1e-12);
            }
        }
        // the library spinors agree with the ones built here
        let own = [u(p, 0), u(p, 1)];
        let theirs = lib(bispinor_u);
        for s in 0..2 {
            for i in 0..4 {
                prop_assert!((own[s][i] - theirs[s][i]).norm() < 1e-14);
            }
        }
    }
}
