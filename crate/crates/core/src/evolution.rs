//! Time evolution of the momentum-space Dirac system.
//!
//! Free phases `e^{∓iℰt}` are handled exactly by working in the interaction
//! picture; the remaining coupled system is advanced with classical RK4.
//! Because the plateau Hamiltonian is periodic in the optical period, the
//! plateau is normally crossed with powers of a one-cycle propagator instead
//! of stepping every cycle ([`PlateauMethod::Floquet`]).
//!
//! Channel probabilities are read out *field-free*: each sample is the state
//! that would result if the field were ramped down at that moment, exactly
//! as a detector after the interaction region would see it.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use crate::dirac::{Branch, SpinMatrix2, SpinState};
use crate::field::{envelope, CouplingOperator, LaserConfig, MomentumLadder};
use crate::linalg::DenseMatrix;
use crate::{Error, Result, C64};

/// Default RK4 resolution. The particle/antiparticle couplings rotate at
/// about `2ℰ`, so the step must resolve that rather than the laser period.
pub const DEFAULT_STEPS_PER_CYCLE: usize = 8192;

/// Norm drift beyond which a run is aborted.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

const MIN_STEPS_PER_CYCLE: usize = 16;
const NEG_I: C64 = C64::new(0.0, -1.0);

/// Amplitudes `c_n^s` (positive branch) and `d_n^s` (negative branch) over
/// the ladder, laid out as in [`MomentumLadder::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    truncation: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zeros(ladder: &MomentumLadder) -> Self {
        Self { truncation: ladder.truncation, amps: vec![C64::new(0.0, 0.0); ladder.dim()] }
    }

    pub fn from_amplitudes(ladder: &MomentumLadder, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != ladder.dim() {
            return Err(Error::DimensionMismatch { expected: ladder.dim(), found: amps.len() });
        }
        Ok(Self { truncation: ladder.truncation, amps })
    }

    /// Electron in rung `n` on the positive branch with spinor `spin`.
    pub fn electron(ladder: &MomentumLadder, n: i32, spin: &SpinState) -> Result<Self> {
        let mut s = Self::zeros(ladder);
        for k in 0..2 {
            s.amps[ladder.index(n, Branch::Positive, k)?] = spin[k];
        }
        Ok(s)
    }

    /// Single basis amplitude set to one.
    pub fn basis(ladder: &MomentumLadder, n: i32, branch: Branch, spin: usize) -> Result<Self> {
        let mut s = Self::zeros(ladder);
        s.amps[ladder.index(n, branch, spin)?] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Total weight on the negative branch, `Σ|d|²`.
    pub fn negative_branch_weight(&self) -> f64 {
        self.amps.chunks(2).skip(1).step_by(2).flatten().map(|c| c.norm_sqr()).sum()
    }

    /// Two spin components of rung `n` on `branch`.
    pub fn spinor(&self, ladder: &MomentumLadder, n: i32, branch: Branch) -> Result<[C64; 2]> {
        Ok([self.amps[ladder.index(n, branch, 0)?], self.amps[ladder.index(n, branch, 1)?]])
    }

    /// `|⟨χ|c_n⟩|²` for the positive branch.
    pub fn probability(&self, ladder: &MomentumLadder, n: i32, chi: &SpinState) -> Result<f64> {
        Ok(chi.inner(&SpinState(self.spinor(ladder, n, Branch::Positive)?)).norm_sqr())
    }

    fn check(&self, ladder: &MomentumLadder) -> Result<()> {
        if self.truncation != ladder.truncation || self.amps.len() != ladder.dim() {
            return Err(Error::DimensionMismatch { expected: ladder.dim(), found: self.amps.len() });
        }
        Ok(())
    }
}

/// `dψ/dt = −i (H₀ + V(t)) ψ` in the Schrödinger picture.
pub fn rhs(state: &StateVector, t: f64, cfg: &LaserConfig, ladder: &MomentumLadder) -> Result<StateVector> {
    state.check(ladder)?;
    let op = CouplingOperator::new(cfg, ladder)?;
    let mut v = vec![C64::new(0.0, 0.0); state.len()];
    op.apply(t, envelope(t, cfg), &state.amps, &mut v);
    let amps = v
        .iter()
        .zip(&state.amps)
        .zip(&op.energies)
        .map(|((vi, psi), e)| NEG_I * (psi * e + vi))
        .collect();
    Ok(StateVector { truncation: state.truncation, amps })
}

/// How the flat-top part of the pulse is crossed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum PlateauMethod {
    /// Powers of a unitarized one-cycle propagator.
    #[default]
    Floquet,
    /// RK4 on the state through every cycle.
    Direct,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropagationOptions {
    pub steps_per_cycle: usize,
    /// Cycles between samples; `None` picks about a thousand samples.
    pub sample_stride_cycles: Option<u64>,
    /// Rungs whose positive-branch spinors are recorded at every sample.
    pub readout_rungs: Vec<i32>,
    pub method: PlateauMethod,
    pub norm_drift_limit: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            steps_per_cycle: DEFAULT_STEPS_PER_CYCLE,
            sample_stride_cycles: None,
            readout_rungs: vec![0, 2],
            method: PlateauMethod::Floquet,
            norm_drift_limit: NORM_DRIFT_LIMIT,
        }
    }
}

/// Sampled field-free readout of a run.
#[derive(Clone, Debug)]
pub struct SimulationResult {
    /// End time of the (virtual) pulse each sample corresponds to.
    pub times: Vec<f64>,
    pub readout_rungs: Vec<i32>,
    /// `readout[k][r]`: spinor of rung `readout_rungs[r]` at sample `k`.
    pub readout: Vec<Vec<[C64; 2]>>,
    /// `Σ|ψ|²` of the propagated state at each sample.
    pub norms: Vec<f64>,
    /// Negative-branch weight of the propagated state at each sample.
    pub negative_weight: Vec<f64>,
    pub max_norm_drift: f64,
    pub final_state: StateVector,
    pub optical_period: f64,
}

impl SimulationResult {
    fn rung_slot(&self, n: i32) -> Result<usize> {
        self.readout_rungs
            .iter()
            .position(|&r| r == n)
            .ok_or_else(|| Error::InvalidArgument(alloc::format!("rung {n} was not recorded")))
    }

    pub fn spinor(&self, sample: usize, n: i32) -> Result<SpinState> {
        Ok(SpinState(self.readout[sample][self.rung_slot(n)?]))
    }

    /// `|⟨χ|c_n⟩|²` at every sample.
    pub fn probability_series(&self, n: i32, chi: &SpinState) -> Result<Vec<f64>> {
        let slot = self.rung_slot(n)?;
        Ok(self.readout.iter().map(|r| chi.inner(&SpinState(r[slot])).norm_sqr()).collect())
    }

    pub fn max_negative_weight(&self) -> f64 {
        self.negative_weight.iter().copied().fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Interaction-picture RK4 over a block of column vectors sharing one time
/// grid. Blocks are stored row-major (`b[row * ncol + col]`) so that one
/// coupling entry updates all columns in a contiguous sweep.
struct Integrator<'a> {
    op: &'a CouplingOperator,
    ncol: usize,
    values: Vec<C64>,
    y: Vec<C64>,
}

impl<'a> Integrator<'a> {
    fn new(op: &'a CouplingOperator, ncol: usize) -> Self {
        let d = op.dim();
        Self { op, ncol, values: Vec::new(), y: vec![C64::new(0.0, 0.0); d * ncol] }
    }

    /// `out = −i e^{iH₀t} V(t) e^{−iH₀t} b` given `phase = e^{iH₀t}`.
    fn deriv(&mut self, t: f64, env: f64, phase: &[C64], b: &[C64], out: &mut [C64]) {
        let nc = self.ncol;
        if env == 0.0 {
            out.fill(C64::new(0.0, 0.0));
            return;
        }
        for ((yr, br), p) in self.y.chunks_mut(nc).zip(b.chunks(nc)).zip(phase) {
            let pc = p.conj();
            for (y, x) in yr.iter_mut().zip(br) {
                *y = pc * x;
            }
        }
        let em = C64::from_polar(env, -self.op.k_l * t);
        let ep = C64::from_polar(env, self.op.k_l * t);
        if nc == 1 {
            for ((o, p), row) in out.iter_mut().zip(phase).zip(&self.op.rows) {
                let (mut am, mut ap) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                for e in row {
                    let y = self.y[e.col];
                    am += e.minus * y;
                    ap += e.plus * y;
                }
                *o = NEG_I * p * (am * em + ap * ep);
            }
            return;
        }
        self.values.clear();
        self.values.extend(self.op.rows.iter().flatten().map(|e| e.minus * em + e.plus * ep));
        let mut k = 0;
        for ((orow, p), row) in out.chunks_mut(nc).zip(phase).zip(&self.op.rows) {
            orow.fill(C64::new(0.0, 0.0));
            for e in row {
                let v = self.values[k];
                k += 1;
                let yr = &self.y[e.col * nc..(e.col + 1) * nc];
                for (o, y) in orow.iter_mut().zip(yr) {
                    *o += v * y;
                }
            }
            let f = NEG_I * p;
            for o in orow.iter_mut() {
                *o *= f;
            }
        }
    }

    /// Advances an interaction-picture block (referenced to `t = 0`) from
    /// `t0` to `t1` in `steps` equal steps.
    fn run(&mut self, b: &mut [C64], t0: f64, t1: f64, steps: usize, env: &dyn Fn(f64) -> f64) {
        let h = (t1 - t0) / steps as f64;
        let n = b.len();
        let d = self.op.dim();
        let zero = C64::new(0.0, 0.0);
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
            (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
        let half: Vec<C64> = self.op.energies.iter().map(|e| C64::from_polar(1.0, e * 0.5 * h)).collect();
        let (mut p0, mut pm, mut pe) = (vec![zero; d], vec![zero; d], vec![zero; d]);
        for i in 0..steps {
            let t = t0 + i as f64 * h;
            let tm = t + 0.5 * h;
            let te = t + h;
            for j in 0..d {
                p0[j] = C64::from_polar(1.0, self.op.energies[j] * t);
                pm[j] = p0[j] * half[j];
                pe[j] = pm[j] * half[j];
            }
            let em = env(tm);
            self.deriv(t, env(t), &p0, b, &mut k1);
            axpy(&mut tmp, b, 0.5 * h, &k1);
            self.deriv(tm, em, &pm, &tmp, &mut k2);
            axpy(&mut tmp, b, 0.5 * h, &k2);
            self.deriv(tm, em, &pm, &tmp, &mut k3);
            axpy(&mut tmp, b, h, &k3);
            self.deriv(te, env(te), &pe, &tmp, &mut k4);
            let w = h / 6.0;
            for j in 0..n {
                b[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * w;
            }
        }
    }
}

fn axpy(out: &mut [C64], x: &[C64], a: f64, y: &[C64]) {
    for ((o, x), y) in out.iter_mut().zip(x).zip(y) {
        *o = x + y * a;
    }
}

fn free_phase(energies: &[C64], psi: &mut [C64]) {
    for (p, f) in psi.iter_mut().zip(energies) {
        *p *= f;
    }
}

/// Reusable propagation machinery for one field and ladder: ramp shapes,
/// the one-cycle propagator and the field-free readout rows.
pub struct Propagator {
    cfg: LaserConfig,
    ladder: MomentumLadder,
    op: CouplingOperator,
    steps_per_cycle: usize,
    readout_rungs: Vec<i32>,
    /// `⟨r| U_down` for every recorded rung and spin, Schrödinger picture.
    readout_rows: Vec<Vec<C64>>,
    cycle: Option<DenseMatrix>,
}

impl Propagator {
    pub fn new(cfg: &LaserConfig, ladder: &MomentumLadder, opts: &PropagationOptions) -> Result<Self> {
        if opts.steps_per_cycle < MIN_STEPS_PER_CYCLE {
            return Err(Error::InvalidArgument(alloc::format!(
                "steps_per_cycle must be at least {MIN_STEPS_PER_CYCLE}, got {}",
                opts.steps_per_cycle
            )));
        }
        for &n in &opts.readout_rungs {
            ladder.momentum(n)?;
        }
        let op = CouplingOperator::new(cfg, ladder)?;
        let mut p = Self {
            cfg: *cfg,
            ladder: *ladder,
            op,
            steps_per_cycle: opts.steps_per_cycle,
            readout_rungs: opts.readout_rungs.clone(),
            readout_rows: Vec::new(),
            cycle: None,
        };
        p.readout_rows = p.build_readout_rows()?;
        Ok(p)
    }

    fn ramp_time(&self) -> f64 {
        self.cfg.ramp_cycles as f64 * self.cfg.period()
    }

    fn phases(&self, t: f64) -> Vec<C64> {
        self.op.energies.iter().map(|e| C64::from_polar(1.0, -e * t)).collect()
    }

    fn ramp_up(&self) -> impl Fn(f64) -> f64 {
        let r = self.ramp_time();
        move |t: f64| {
            let s = (PI * t / (2.0 * r)).sin();
            s * s
        }
    }

    fn ramp_down(&self) -> impl Fn(f64) -> f64 {
        let r = self.ramp_time();
        move |t: f64| {
            let c = (PI * t / (2.0 * r)).cos();
            c * c
        }
    }

    fn ramp_steps(&self) -> usize {
        self.steps_per_cycle * self.cfg.ramp_cycles as usize
    }

    /// Rows of the Schrödinger ramp-down propagator for the recorded rungs,
    /// obtained by carrying unit vectors backwards through the ramp.
    fn build_readout_rows(&self) -> Result<Vec<Vec<C64>>> {
        let d = self.ladder.dim();
        let r = self.ramp_time();
        let mut idx = Vec::new();
        for &n in &self.readout_rungs {
            for s in 0..2 {
                idx.push(self.ladder.index(n, Branch::Positive, s)?);
            }
        }
        let nc = idx.len();
        if nc == 0 {
            return Ok(Vec::new());
        }
        let mut block = vec![C64::new(0.0, 0.0); d * nc];
        for (c, &i) in idx.iter().enumerate() {
            block[i * nc + c] = C64::new(1.0, 0.0);
        }
        if r > 0.0 {
            let mut integ = Integrator::new(&self.op, nc);
            integ.run(&mut block, r, 0.0, self.ramp_steps(), &self.ramp_down());
        }
        Ok(idx
            .iter()
            .enumerate()
            .map(|(c, &i)| {
                let f = C64::from_polar(1.0, -self.op.energies[i] * r);
                (0..d).map(|j| block[j * nc + c].conj() * f).collect()
            })
            .collect())
    }

    /// One-cycle Schrödinger propagator at full field, unitarized.
    pub fn cycle_propagator(&mut self) -> &DenseMatrix {
        if self.cycle.is_none() {
            let d = self.ladder.dim();
            let mut block = vec![C64::new(0.0, 0.0); d * d];
            for j in 0..d {
                block[j * d + j] = C64::new(1.0, 0.0);
            }
            let t = self.cfg.period();
            let mut integ = Integrator::new(&self.op, d);
            integ.run(&mut block, 0.0, t, self.steps_per_cycle, &|_| 1.0);
            let ph = self.phases(t);
            for (row, f) in block.chunks_mut(d).zip(&ph) {
                for x in row.iter_mut() {
                    *x *= f;
                }
            }
            let mut u = DenseMatrix::from_row_major(d, block);
            u.unitarize();
            self.cycle = Some(u);
        }
        self.cycle.as_ref().expect("cycle propagator built above")
    }

    fn read(&self, psi: &[C64]) -> Vec<[C64; 2]> {
        self.readout_rows
            .chunks(2)
            .map(|rs| {
                let a = |row: &Vec<C64>| row.iter().zip(psi).map(|(x, y)| x * y).sum::<C64>();
                [a(&rs[0]), a(&rs[1])]
            })
            .collect()
    }

    /// Runs the whole pulse, ramps included, on `initial`.
    pub fn run(&mut self, initial: &StateVector, method: PlateauMethod, stride: Option<u64>, limit: f64) -> Result<SimulationResult> {
        initial.check(&self.ladder)?;
        let period = self.cfg.period();
        let ramp = self.ramp_time();
        let plateau = self.cfg.plateau_cycles;
        let n0 = initial.norm_sqr();
        let stride = stride.unwrap_or((plateau / 1000).max(1)).max(1);

        let mut res = SimulationResult {
            times: vec![0.0],
            readout_rungs: self.readout_rungs.clone(),
            readout: vec![self
                .readout_rungs
                .iter()
                .map(|&n| initial.spinor(&self.ladder, n, Branch::Positive))
                .collect::<Result<_>>()?],
            norms: vec![n0],
            negative_weight: vec![initial.negative_branch_weight()],
            max_norm_drift: 0.0,
            final_state: initial.clone(),
            optical_period: period,
        };

        let mut psi = initial.amps.clone();
        let steps = self.ramp_steps();
        if steps > 0 {
            let mut integ = Integrator::new(&self.op, 1);
            integ.run(&mut psi, 0.0, ramp, steps, &self.ramp_up());
            free_phase(&self.phases(ramp), &mut psi);
        }

        let record = |res: &mut SimulationResult, psi: &[C64], m: u64, me: &Self| -> Result<()> {
            let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
            let drift = (norm - n0).abs();
            res.max_norm_drift = res.max_norm_drift.max(drift);
            let t = (m + 2 * me.cfg.ramp_cycles) as f64 * period;
            if drift > limit {
                return Err(Error::NormDrift { drift, limit, time: t });
            }
            res.times.push(t);
            res.readout.push(me.read(psi));
            res.norms.push(norm);
            let neg = StateVector { truncation: me.ladder.truncation, amps: psi.to_vec() }.negative_branch_weight();
            res.negative_weight.push(neg);
            Ok(())
        };

        record(&mut res, &psi, 0, self)?;
        let mut m = 0;
        match method {
            PlateauMethod::Floquet => {
                if plateau > 0 {
                    let u = self.cycle_propagator().clone();
                    let mut jump = u.pow(stride.min(plateau));
                    jump.unitarize();
                    let mut jump_len = stride.min(plateau);
                    while m < plateau {
                        let k = stride.min(plateau - m);
                        if k != jump_len {
                            jump = u.pow(k);
                            jump.unitarize();
                            jump_len = k;
                        }
                        psi = jump.matvec(&psi);
                        m += k;
                        record(&mut res, &psi, m, self)?;
                    }
                }
            }
            PlateauMethod::Direct => {
                let mut b = psi.clone();
                let conj: Vec<C64> = self.phases(ramp).iter().map(|c| c.conj()).collect();
                free_phase(&conj, &mut b);
                let cfg = self.cfg;
                let env = move |t: f64| envelope(t, &cfg);
                let mut integ = Integrator::new(&self.op, 1);
                while m < plateau {
                    let k = stride.min(plateau - m);
                    let t0 = ramp + m as f64 * period;
                    let t1 = t0 + k as f64 * period;
                    integ.run(&mut b, t0, t1, self.steps_per_cycle * k as usize, &env);
                    m += k;
                    psi = b.clone();
                    free_phase(&self.phases(t1), &mut psi);
                    record(&mut res, &psi, m, self)?;
                }
            }
        }

        if steps > 0 {
            let mut integ = Integrator::new(&self.op, 1);
            integ.run(&mut psi, 0.0, ramp, steps, &self.ramp_down());
            free_phase(&self.phases(ramp), &mut psi);
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        res.max_norm_drift = res.max_norm_drift.max((norm - n0).abs());
        res.final_state = StateVector { truncation: self.ladder.truncation, amps: psi };
        Ok(res)
    }
}

/// Propagates `initial` through a pulse whose total length, ramps included,
/// is `t_final` (rounded to whole optical cycles).
pub fn propagate(
    initial: &StateVector,
    cfg: &LaserConfig,
    ladder: &MomentumLadder,
    t_final: f64,
    opts: &PropagationOptions,
) -> Result<SimulationResult> {
    initial.check(ladder)?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidArgument(alloc::format!("t_final must be finite and non-negative, got {t_final}")));
    }
    if t_final == 0.0 {
        let mut p = Propagator::new(cfg, ladder, opts)?;
        let mut r = p.run(initial, opts.method, opts.sample_stride_cycles, opts.norm_drift_limit)?;
        r.times.truncate(1);
        r.readout.truncate(1);
        r.norms.truncate(1);
        r.negative_weight.truncate(1);
        r.max_norm_drift = 0.0;
        r.final_state = initial.clone();
        return Ok(r);
    }
    let cfg = cfg.with_total_duration(t_final)?;
    let mut p = Propagator::new(&cfg, ladder, opts)?;
    p.run(initial, opts.method, opts.sample_stride_cycles, opts.norm_drift_limit)
}

/// Spin block `U^{+,s;+,s'}_{n,n'}(t, 0)` over the ↑/↓ basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagatorBlock {
    pub n: i32,
    pub n_prime: i32,
    pub matrix: SpinMatrix2,
}

/// Positive-branch propagator blocks `(n, n')` for a pulse of total length
/// `t`, read out field-free. Columns come from separate runs started in
/// each basis state of rung `n'`.
pub fn extract_propagator(
    cfg: &LaserConfig,
    ladder: &MomentumLadder,
    t: f64,
    channels: &[(i32, i32)],
    opts: &PropagationOptions,
) -> Result<Vec<PropagatorBlock>> {
    let mut rungs: Vec<i32> = Vec::new();
    for &(n, np) in channels {
        ladder.momentum(n)?;
        ladder.momentum(np)?;
        if !rungs.contains(&n) {
            rungs.push(n);
        }
    }
    let opts = PropagationOptions { readout_rungs: rungs, ..opts.clone() };
    let basis = [SpinState::UP, SpinState::DOWN];
    let field = if t == 0.0 { *cfg } else { cfg.with_total_duration(t)? };
    let mut prop = Propagator::new(&field, ladder, &opts)?;
    let mut blocks = Vec::new();
    for &(n, np) in channels {
        let mut m = SpinMatrix2::zero();
        for (j, chi) in basis.iter().enumerate() {
            let init = StateVector::electron(ladder, np, chi)?;
            let spinor = if t == 0.0 {
                init.spinor(ladder, n, Branch::Positive)?
            } else {
                let stride = Some(field.plateau_cycles.max(1));
                let r = prop.run(&init, opts.method, stride, opts.norm_drift_limit)?;
                r.spinor(r.len() - 1, n)?.0
            };
            m.0[0][j] = spinor[0];
            m.0[1][j] = spinor[1];
        }
        blocks.push(PropagatorBlock { n, n_prime: np, matrix: m });
    }
    Ok(blocks)
}
