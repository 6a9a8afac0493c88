//! Tilted-basis projections, Rabi fits and per-sample channel tables.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::consts::natural_to_fs;
use crate::dirac::{SpinMatrix2, SpinState, TiltedSpin};
use crate::evolution::SimulationResult;
use crate::{Error, Result, C64};

const MIN_SAMPLES: usize = 50;
const MIN_R_SQUARED: f64 = 0.9;
/// A run of exactly half a Rabi period lands slightly on either side of
/// `Ω·span = π` once ramps and rounding enter; this is the slack allowed.
const MIN_HALF_PERIODS: f64 = 0.95;

/// `⟨bra|U|ket⟩` as the fixed linear combination of the `↑/↓` entries
/// `[U↑↑, U↑↓, U↓↑, U↓↓]` weighted by `1/√8`.
///
/// The diagonal rows carry the sign that makes `⟨s|𝟙|s⟩ = 1`.
pub fn project_tilted(u: &SpinMatrix2, bra: TiltedSpin, ket: TiltedSpin) -> C64 {
    use TiltedSpin::{NorthWest as Nw, SouthEast as Se};
    let (p, m) = (1.0 + SQRT_2, SQRT_2 - 1.0);
    let w: [f64; 4] = match (bra, ket) {
        (Se, Se) => [m, 1.0, 1.0, p],
        (Se, Nw) => [-1.0, m, -p, 1.0],
        (Nw, Se) => [-1.0, -p, m, 1.0],
        (Nw, Nw) => [p, -1.0, -1.0, m],
    };
    let entries = [u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]];
    entries.iter().zip(w).map(|(e, c)| e * c).sum::<C64>() / 8.0_f64.sqrt()
}

/// Least-squares fit of `P(t) = sin²((Ω t + φ)/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RabiFit {
    pub omega: f64,
    /// `φ` in `(−π, π]`.
    pub phase: f64,
    /// RMS of the residuals.
    pub residual: f64,
    pub r_squared: f64,
    /// One-sigma statistical uncertainty of `Ω`, treating residuals as noise.
    pub omega_std_error: f64,
    /// Shift of `Ω` whose change of the model matches the residual RMS.
    pub omega_resolution: f64,
}

impl RabiFit {
    pub fn model(&self, t: f64) -> f64 {
        let s = ((self.omega * t + self.phase) / 2.0).sin();
        s * s
    }
}

struct Scaled<'a> {
    tau: Vec<f64>,
    y: &'a [f64],
}

impl Scaled<'_> {
    fn sse(&self, w: f64, psi: f64) -> f64 {
        self.tau
            .iter()
            .zip(self.y)
            .map(|(&t, &y)| {
                let s = ((w * t + psi) / 2.0).sin();
                (s * s - y).powi(2)
            })
            .sum()
    }

    /// Best phase for a fixed frequency from the linear problem
    /// `y − ½ = α cos(wτ) + β sin(wτ)`.
    fn phase_for(&self, w: f64) -> f64 {
        let (mut cc, mut ss, mut cs, mut yc, mut ys) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in self.tau.iter().zip(self.y) {
            let (s, c) = (w * t).sin_cos();
            let d = y - 0.5;
            cc += c * c;
            ss += s * s;
            cs += c * s;
            yc += d * c;
            ys += d * s;
        }
        let det = cc * ss - cs * cs;
        if det.abs() < 1e-300 {
            return 0.0;
        }
        let alpha = (yc * ss - ys * cs) / det;
        let beta = (ys * cc - yc * cs) / det;
        (2.0 * beta).atan2(-2.0 * alpha)
    }

    /// Normal-equation pieces `JᵀJ`, `Jᵀr` at `(w, ψ)`.
    fn normal(&self, w: f64, psi: f64) -> ([[f64; 2]; 2], [f64; 2]) {
        let mut a = [[0.0; 2]; 2];
        let mut g = [0.0; 2];
        for (&t, &y) in self.tau.iter().zip(self.y) {
            let x = w * t + psi;
            let s = (x / 2.0).sin();
            let r = s * s - y;
            let d = x.sin() / 2.0;
            let j = [t * d, d];
            for i in 0..2 {
                g[i] += j[i] * r;
                for k in 0..2 {
                    a[i][k] += j[i] * j[k];
                }
            }
        }
        (a, g)
    }

    fn levenberg_marquardt(&self, mut w: f64, mut psi: f64) -> (f64, f64) {
        let mut lambda = 1e-3;
        let mut cost = self.sse(w, psi);
        for _ in 0..200 {
            let (a, g) = self.normal(w, psi);
            let mut improved = false;
            while lambda < 1e12 {
                let m = [[a[0][0] * (1.0 + lambda), a[0][1]], [a[1][0], a[1][1] * (1.0 + lambda)]];
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                if det.abs() < 1e-300 {
                    lambda *= 10.0;
                    continue;
                }
                let dw = -(m[1][1] * g[0] - m[0][1] * g[1]) / det;
                let dp = -(m[0][0] * g[1] - m[1][0] * g[0]) / det;
                let trial = self.sse(w + dw, psi + dp);
                if trial <= cost {
                    let small = dw.abs() <= 1e-15 * w.abs().max(1.0) && dp.abs() <= 1e-15;
                    w += dw;
                    psi += dp;
                    let gain = cost - trial;
                    cost = trial;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = !small && gain > 1e-16 * cost.max(1e-300);
                    break;
                }
                lambda *= 10.0;
            }
            if !improved {
                break;
            }
        }
        (w, psi)
    }
}

fn wrap_phase(p: f64) -> f64 {
    let mut x = p % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Fits `sin²((Ω t + φ)/2)` with unit amplitude.
///
/// The frequency is seeded from a scan of the phase-optimal objective on a
/// grid from below the half-period bound up to the sampling limit, then
/// refined by Levenberg–Marquardt in `(Ω, φ)`.
pub fn fit_rabi(times: &[f64], probabilities: &[f64]) -> Result<RabiFit> {
    if times.len() != probabilities.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), found: probabilities.len() });
    }
    let n = times.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientData(alloc::format!("{n} samples, need at least {MIN_SAMPLES}")));
    }
    if times.iter().chain(probabilities).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("series contains non-finite values".into()));
    }
    let t0 = times.iter().copied().fold(f64::INFINITY, f64::min);
    let span = times.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t0;
    if span <= 0.0 {
        return Err(Error::InsufficientData("all samples share one time".into()));
    }
    let data = Scaled { tau: times.iter().map(|t| (t - t0) / span).collect(), y: probabilities };

    let w_hi = PI * (n - 1) as f64;
    let step = 0.2;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut w = 0.5 * PI;
    while w <= w_hi {
        let psi = data.phase_for(w);
        let cost = data.sse(w, psi);
        if cost < best.0 {
            best = (cost, w, psi);
        }
        w += step;
    }
    let (mut w, mut psi) = data.levenberg_marquardt(best.1, best.2);
    if w < 0.0 {
        w = -w;
        psi = -psi;
    }

    let sse = data.sse(w, psi);
    let mean = probabilities.iter().sum::<f64>() / n as f64;
    let sst: f64 = probabilities.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if sst > 0.0 { (1.0 - sse / sst).clamp(0.0, 1.0) } else { 0.0 };
    if r_squared < MIN_R_SQUARED {
        return Err(Error::PoorFit { r_squared });
    }
    if w < MIN_HALF_PERIODS * PI {
        return Err(Error::InsufficientData("series covers less than half a Rabi period".into()));
    }
    let (a, _) = data.normal(w, psi);
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let sigma2 = sse / (n - 2) as f64;
    let inv_ww = if det > 0.0 { a[1][1] / det } else { f64::INFINITY };
    let omega = w / span;
    Ok(RabiFit {
        omega,
        phase: wrap_phase(psi - omega * t0),
        residual: (sse / n as f64).sqrt(),
        r_squared,
        omega_std_error: (sigma2 * inv_ww).sqrt() / span,
        omega_resolution: (sse * inv_ww).sqrt() / span,
    })
}

/// Tilted-basis probabilities of rungs 0 and 2 at one sample.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelRow {
    pub t: f64,
    pub t_cycles: f64,
    pub t_fs: f64,
    pub p0_se: f64,
    pub p0_nw: f64,
    pub p2_se: f64,
    pub p2_nw: f64,
    /// `|Σ|ψ|² − 1|` of the full state.
    pub norm_residual: f64,
}

impl ChannelRow {
    /// Probabilities for `(rung, final spin)`.
    pub fn probability(&self, n: i32, spin: TiltedSpin) -> Option<f64> {
        match (n, spin) {
            (0, TiltedSpin::SouthEast) => Some(self.p0_se),
            (0, TiltedSpin::NorthWest) => Some(self.p0_nw),
            (2, TiltedSpin::SouthEast) => Some(self.p2_se),
            (2, TiltedSpin::NorthWest) => Some(self.p2_nw),
            _ => None,
        }
    }

    /// `1 −` weight left in the initial channel, plus the three others.
    fn deviations(&self, initial: TiltedSpin) -> [f64; 4] {
        match initial {
            TiltedSpin::NorthWest => [1.0 - self.p0_nw, self.p0_se, self.p2_nw, self.p2_se],
            TiltedSpin::SouthEast => [1.0 - self.p0_se, self.p0_nw, self.p2_nw, self.p2_se],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelReport {
    pub initial: TiltedSpin,
    pub rows: Vec<ChannelRow>,
}

impl ChannelReport {
    /// Largest `|P(2,↖) + P(0,↘) − 1|`.
    pub fn max_listed_sum_deviation(&self) -> f64 {
        self.rows.iter().map(|r| (r.p2_nw + r.p0_se - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest of the four channel deviations from "nothing happens" at any sample.
    pub fn max_channel_deviation(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.deviations(self.initial))
            .fold(0.0, f64::max)
    }

    /// Sample index of the largest rung-2 population and the `s↖` share of it.
    pub fn purity_at_peak(&self) -> Option<(usize, f64)> {
        let (i, row) = self
            .rows
            .iter()
            .enumerate()
            .max_by(|a, b| (a.1.p2_se + a.1.p2_nw).total_cmp(&(b.1.p2_se + b.1.p2_nw)))?;
        let total = row.p2_se + row.p2_nw;
        (total > 0.0).then(|| (i, row.p2_nw / total))
    }

    pub fn max_norm_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.norm_residual).fold(0.0, f64::max)
    }

    /// `(t, P(2,↖))`, the series the Rabi model describes.
    pub fn diffraction_series(&self) -> (Vec<f64>, Vec<f64>) {
        self.rows.iter().map(|r| (r.t, r.p2_nw)).unzip()
    }
}

fn tilted_probability(spinor: &SpinState, spin: TiltedSpin) -> f64 {
    spin.state().inner(spinor).norm_sqr()
}

/// Per-sample probabilities on rungs 0 and 2 in the tilted basis. The run
/// must have recorded both rungs.
pub fn channel_report(result: &SimulationResult, initial: TiltedSpin) -> Result<ChannelReport> {
    let mut rows = Vec::with_capacity(result.len());
    for (k, &t) in result.times.iter().enumerate() {
        let c0 = result.spinor(k, 0)?;
        let c2 = result.spinor(k, 2)?;
        rows.push(ChannelRow {
            t,
            t_cycles: t / result.optical_period,
            t_fs: natural_to_fs(t),
            p0_se: tilted_probability(&c0, TiltedSpin::SouthEast),
            p0_nw: tilted_probability(&c0, TiltedSpin::NorthWest),
            p2_se: tilted_probability(&c2, TiltedSpin::SouthEast),
            p2_nw: tilted_probability(&c2, TiltedSpin::NorthWest),
            norm_residual: (result.norms[k] - 1.0).abs(),
        });
    }
    Ok(ChannelReport { initial, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirac::spin_filter_matrix;
    use approx::assert_abs_diff_eq;

    const ALL: [TiltedSpin; 2] = [TiltedSpin::SouthEast, TiltedSpin::NorthWest];

    #[test]
    fn identity_projections() {
        let one = SpinMatrix2::identity();
        assert_abs_diff_eq!(project_tilted(&one, TiltedSpin::SouthEast, TiltedSpin::SouthEast).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(project_tilted(&one, TiltedSpin::NorthWest, TiltedSpin::NorthWest).re, 1.0, epsilon = 1e-15);
        assert!(project_tilted(&one, TiltedSpin::NorthWest, TiltedSpin::SouthEast).norm() < 1e-15);
    }

    #[test]
    fn filter_matrix_projections() {
        let m = spin_filter_matrix();
        for bra in ALL {
            for ket in ALL {
                let want = if (bra, ket) == (TiltedSpin::NorthWest, TiltedSpin::SouthEast) { 1.0 } else { 0.0 };
                assert!((project_tilted(&m, bra, ket) - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn projections_match_bra_ket() {
        let u = SpinMatrix2([
            [C64::new(0.3, -1.2), C64::new(2.0, 0.5)],
            [C64::new(-0.7, 0.1), C64::new(0.0, 0.9)],
        ]);
        for bra in ALL {
            for ket in ALL {
                let direct = u.matrix_element(&bra.state(), &ket.state());
                assert!((project_tilted(&u, bra, ket) - direct).norm() < 1e-12);
            }
        }
    }

    fn synthetic(omega: f64, phase: f64, n: usize, span: f64) -> (Vec<f64>, Vec<f64>) {
        (0..n)
            .map(|i| {
                let t = span * i as f64 / (n - 1) as f64;
                let s = ((omega * t + phase) / 2.0).sin();
                (t, s * s)
            })
            .unzip()
    }

    #[test]
    fn self_fit() {
        let (t, y) = synthetic(2.02e-7, 0.0, 200, 3.0e7);
        let fit = fit_rabi(&t, &y).unwrap();
        assert!((fit.omega - 2.02e-7).abs() < 1e-10, "{}", fit.omega);
        assert!(fit.r_squared > 1.0 - 1e-12);
        assert!(fit.phase.abs() < 1e-6);
    }

    #[test]
    fn recovers_phase_and_many_periods() {
        let (t, y) = synthetic(3.3, 0.8, 400, 20.0);
        let fit = fit_rabi(&t, &y).unwrap();
        assert!((fit.omega - 3.3).abs() < 1e-9);
        assert!((fit.phase - 0.8).abs() < 1e-8);
    }

    #[test]
    fn constant_series_is_poor() {
        let t: Vec<f64> = (0..100).map(f64::from).collect();
        assert!(matches!(fit_rabi(&t, &[0.0; 100]), Err(Error::PoorFit { .. })));
    }

    #[test]
    fn preconditions() {
        let (t, y) = synthetic(1.0, 0.0, 20, 10.0);
        assert!(matches!(fit_rabi(&t, &y), Err(Error::InsufficientData(_))));
        assert!(matches!(fit_rabi(&t, &y[..5]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn scaled_data_moves_r_squared_not_omega() {
        let (t, y) = synthetic(2.0, 0.0, 300, 7.0);
        let clean = fit_rabi(&t, &y).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| 0.93 * v).collect();
        let fit = fit_rabi(&t, &scaled).unwrap();
        assert!(fit.r_squared < clean.r_squared);
        assert!((fit.omega - clean.omega).abs() <= fit.omega_resolution);
    }
}
