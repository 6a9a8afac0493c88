use kdspin_core::analysis::{fit_rabi, project_tilted};
use kdspin_core::compton::{
    compton_terms, crossed_terms, gauge_residual, ofpt_terms, sample_kinematics, ComptonKinematics,
};
use kdspin_core::dirac::{SpinMatrix2, SpinState, TiltedSpin};
use kdspin_core::experiment::diffraction_probability_si;
use kdspin_core::perturbation::{spin_matrix_m, taylor_m, ScaledKinematics};
use kdspin_core::C64;
use proptest::prelude::*;

const TILTED: [TiltedSpin; 2] = [TiltedSpin::SouthEast, TiltedSpin::NorthWest];

fn c64() -> impl Strategy<Value = C64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| C64::new(a, b))
}

fn spin_state() -> impl Strategy<Value = SpinState> {
    (c64(), c64()).prop_filter_map("null spinor", |(a, b)| SpinState::new(a, b).ok())
}

fn kinematics() -> impl Strategy<Value = ComptonKinematics> {
    prop::array::uniform10(0.0f64..1.0).prop_filter_map("singular", |u| sample_kinematics(u).ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn d1_projections_match_bra_ket(a in c64(), b in c64(), c in c64(), d in c64()) {
        let u = SpinMatrix2([[a, b], [c, d]]);
        for bra in TILTED {
            for ket in TILTED {
                let direct = u.matrix_element(&bra.state(), &ket.state());
                prop_assert!((project_tilted(&u, bra, ket) - direct).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn d1_projections_are_linear(a in c64(), b in c64(), c in c64(), d in c64(), z in c64()) {
        let u = SpinMatrix2([[a, b], [c, d]]);
        let v = SpinMatrix2([[d, a], [z, b]]);
        for bra in TILTED {
            for ket in TILTED {
                let lhs = project_tilted(&(u * z + v), bra, ket);
                let rhs = project_tilted(&u, bra, ket) * z + project_tilted(&v, bra, ket);
                prop_assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn emitted_photon_is_on_shell(kin in kinematics()) {
        prop_assert!(kin.energy_residual().abs() < 1e-12);
    }

    #[test]
    fn crossing_swaps_the_covariant_terms(kin in kinematics(), s in spin_state(), t in spin_state()) {
        let [a, b] = compton_terms(&kin, &s, &t).unwrap();
        let [ca, cb] = crossed_terms(&kin, &s, &t).unwrap();
        let scale = a.norm().max(b.norm());
        prop_assert!((a - cb).norm() < 1e-12 * scale);
        prop_assert!((b - ca).norm() < 1e-12 * scale);
    }

    #[test]
    fn emitted_polarization_is_gauge_invariant(kin in kinematics(), s in spin_state(), t in spin_state(), l in c64()) {
        prop_assert!(gauge_residual(&kin, &s, &t, l).unwrap() < 1e-9);
    }

    #[test]
    fn ofpt_terms_are_linear_in_the_final_spin(kin in kinematics(), s in spin_state(), z in c64()) {
        let up = ofpt_terms(&kin, &s, &SpinState::UP).unwrap().sum();
        let down = ofpt_terms(&kin, &s, &SpinState::DOWN).unwrap().sum();
        if let Ok(mix) = SpinState::new(C64::new(1.0, 0.0), z) {
            let n = (1.0 + z.norm_sqr()).sqrt();
            let want = (up + down * z.conj()) / n;
            let got = ofpt_terms(&kin, &s, &mix).unwrap().sum();
            prop_assert!((got - want).norm() < 1e-12 * (up.norm() + down.norm() * z.norm()).max(1e-300) * 10.0);
        }
    }

    #[test]
    fn probability_grows_with_every_input(i1 in 1e15f64..1e25, i2 in 1e15f64..1e25, t in 1e-16f64..1e-12, f in 1.001f64..3.0) {
        let p = diffraction_probability_si(i1, i2, t, 13e3);
        prop_assert!(diffraction_probability_si(i1 * f, i2, t, 13e3) > p);
        prop_assert!(diffraction_probability_si(i1, i2 * f, t, 13e3) > p);
        prop_assert!(diffraction_probability_si(i1, i2, t * f, 13e3) > p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn rabi_fit_ignores_uniform_scaling(omega in 0.5f64..5.0, span_periods in 0.6f64..4.0, scale in 0.85f64..0.99) {
        let span = span_periods * std::f64::consts::TAU / omega;
        let (t, y): (Vec<f64>, Vec<f64>) = (0..300)
            .map(|i| {
                let t = span * i as f64 / 299.0;
                (t, (omega * t / 2.0).sin().powi(2))
            })
            .unzip();
        let clean = fit_rabi(&t, &y).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| v * scale).collect();
        if let Ok(fit) = fit_rabi(&t, &scaled) {
            prop_assert!(fit.r_squared <= clean.r_squared);
            prop_assert!((fit.omega - clean.omega).abs() <= fit.omega_resolution,
                "{} vs {} ± {}", fit.omega, clean.omega, fit.omega_resolution);
        }
    }
}

/// Least-squares slope of `log ‖M − taylor M‖` against `log q` along a
/// fixed direction in `(q_l, q₂, q̃₃)`.
fn taylor_residual_slope(mu: usize, nu: usize) -> f64 {
    let dir = [1.0, 0.6, -0.8];
    let pts: Vec<(f64, f64)> = (0..=20)
        .map(|i| {
            let q = 10f64.powf(-3.0 + 2.0 * i as f64 / 20.0);
            let kin = ScaledKinematics::new(q * dir[0], q * dir[1], q * dir[2]).unwrap();
            let r = (spin_matrix_m(&kin, mu, nu).unwrap() - taylor_m(&kin, mu, nu).unwrap()).frobenius_norm();
            (q.ln(), r.ln())
        })
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn taylor_polynomials_are_quadratic_accurate() {
    for (mu, nu) in [(2, 2), (2, 3), (3, 2), (3, 3)] {
        let slope = taylor_residual_slope(mu, nu);
        assert!((slope - 3.0).abs() <= 0.2, "M^{mu}{nu}: residual slope {slope}");
    }
}
