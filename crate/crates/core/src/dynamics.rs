//! Time evolution under pulse schedules.
//!
//! Constant-amplitude segments are propagated exactly: through the spectral
//! decomposition when the generator is Hermitian, and through a Padé matrix
//! exponential when a decay term makes it non-Hermitian. Sampled envelopes
//! are integrated with an adaptive Dormand–Prince 5(4) stepper.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
// needed for f64 math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::hilbert::{drive_term, Basis, LevelId, Operator};
use crate::linalg::{propagator, HermitianPropagator};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ADAPTIVE_STEPS: usize = 1_000_000;
/// Amplitudes below this magnitude carry no meaningful phase.
pub const PHASE_AMPLITUDE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    /// Constant Rabi frequency (rad/μs).
    Constant(f64),
    /// Rabi frequency sampled every `dt`, linearly interpolated. The pulse
    /// lasts `dt·(values.len() − 1)`.
    Sampled { dt: f64, values: Vec<f64> },
}

/// One drive event on a single transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub from: LevelId,
    pub to: LevelId,
    pub envelope: Envelope,
    pub phase: f64,
    pub detuning: f64,
    pub duration: f64,
}

impl Pulse {
    /// Constant pulse. A zero duration is a valid no-op.
    pub fn constant(
        from: LevelId,
        to: LevelId,
        rabi: f64,
        phase: f64,
        detuning: f64,
        duration: f64,
    ) -> Result<Pulse> {
        if from == to {
            return Err(invalid("pulse needs two distinct levels"));
        }
        if !(rabi.is_finite() && rabi >= 0.0) {
            return Err(invalid("Rabi frequency must be finite and non-negative"));
        }
        if !(duration.is_finite() && duration >= 0.0) {
            return Err(invalid("pulse duration must be finite and non-negative"));
        }
        if !(phase.is_finite() && detuning.is_finite()) {
            return Err(invalid("phase and detuning must be finite"));
        }
        Ok(Pulse { from, to, envelope: Envelope::Constant(rabi), phase, detuning, duration })
    }

    pub fn shaped(
        from: LevelId,
        to: LevelId,
        dt: f64,
        values: Vec<f64>,
        phase: f64,
        detuning: f64,
    ) -> Result<Pulse> {
        if from == to {
            return Err(invalid("pulse needs two distinct levels"));
        }
        if !(dt.is_finite() && dt > 0.0) || values.len() < 2 {
            return Err(invalid("sampled envelope needs dt > 0 and at least two samples"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("envelope samples must be finite and non-negative"));
        }
        let duration = dt * (values.len() - 1) as f64;
        Ok(Pulse { from, to, envelope: Envelope::Sampled { dt, values }, phase, detuning, duration })
    }

    /// Rabi frequency at time `t` into the pulse.
    pub fn rabi_at(&self, t: f64) -> f64 {
        match &self.envelope {
            Envelope::Constant(r) => *r,
            Envelope::Sampled { dt, values } => {
                let x = (t / dt).clamp(0.0, (values.len() - 1) as f64);
                let k = (x.floor() as usize).min(values.len() - 2);
                let f = x - k as f64;
                values[k] * (1.0 - f) + values[k + 1] * f
            }
        }
    }

    /// Single-atom pulse area `∫Ω dt` (trapezoidal for sampled envelopes,
    /// which is exact for the linear interpolant).
    pub fn area(&self) -> f64 {
        match &self.envelope {
            Envelope::Constant(r) => r * self.duration,
            Envelope::Sampled { dt, values } => {
                values.windows(2).map(|w| 0.5 * (w[0] + w[1]) * dt).sum()
            }
        }
    }

    /// The pulse that undoes this one when no static terms act.
    pub fn inverse(&self) -> Pulse {
        let envelope = match &self.envelope {
            Envelope::Constant(r) => Envelope::Constant(*r),
            Envelope::Sampled { dt, values } => {
                Envelope::Sampled { dt: *dt, values: values.iter().rev().copied().collect() }
            }
        };
        Pulse {
            from: self.from,
            to: self.to,
            envelope,
            phase: wrap_phase(self.phase + PI),
            detuning: -self.detuning,
            duration: self.duration,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    Pulse(Pulse),
    Wait(f64),
}

impl Event {
    pub fn duration(&self) -> f64 {
        match self {
            Event::Pulse(p) => p.duration,
            Event::Wait(d) => *d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    events: Vec<Event>,
}

impl Schedule {
    pub fn new() -> Self {
        Schedule::default()
    }

    pub fn from_events(events: Vec<Event>) -> Result<Self> {
        let mut s = Schedule::new();
        for e in events {
            s.push(e)?;
        }
        Ok(s)
    }

    pub fn push(&mut self, event: Event) -> Result<()> {
        if let Event::Wait(d) = event {
            if !(d.is_finite() && d >= 0.0) {
                return Err(invalid("wait duration must be finite and non-negative"));
            }
        }
        self.events.push(event);
        Ok(())
    }

    pub fn push_pulse(&mut self, pulse: Pulse) {
        self.events.push(Event::Pulse(pulse));
    }

    pub fn extend(&mut self, other: &Schedule) {
        self.events.extend(other.events.iter().cloned());
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn pulses(&self) -> impl Iterator<Item = &Pulse> {
        self.events.iter().filter_map(|e| match e {
            Event::Pulse(p) => Some(p),
            Event::Wait(_) => None,
        })
    }

    pub fn total_duration(&self) -> f64 {
        self.events.iter().map(Event::duration).sum()
    }

    /// Reversed schedule with every pulse inverted. Exact inverse of the
    /// original evolution when no static terms act.
    pub fn inverse(&self) -> Schedule {
        let events = self
            .events
            .iter()
            .rev()
            .map(|e| match e {
                Event::Pulse(p) => Event::Pulse(p.inverse()),
                Event::Wait(d) => Event::Wait(*d),
            })
            .collect();
        Schedule { events }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub time: f64,
    pub state: DVector<C64>,
    pub norm2: f64,
}

impl Sample {
    pub fn population(&self, index: usize) -> f64 {
        self.state[index].norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub initial_state: DVector<C64>,
    pub final_state: DVector<C64>,
    pub samples: Vec<Sample>,
}

impl EvolutionResult {
    pub fn final_norm2(&self) -> f64 {
        self.final_state.norm_squared()
    }

    /// `1 − ‖ψ(T)‖²`, the accumulated decay probability.
    pub fn norm_loss(&self) -> f64 {
        1.0 - self.final_norm2()
    }

    pub fn final_population(&self, index: usize) -> f64 {
        self.final_state[index].norm_sqr()
    }
}

/// Propagation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Spacing of recorded samples; `f64::INFINITY` records only the
    /// endpoints.
    pub sample_dt: f64,
    /// Local error tolerance of the adaptive stepper.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { sample_dt: f64::INFINITY, tol: DEFAULT_TOL, max_steps: MAX_ADAPTIVE_STEPS }
    }
}

impl EvolveOptions {
    pub fn sampled(sample_dt: f64) -> Self {
        EvolveOptions { sample_dt, ..Default::default() }
    }
}

/// Evolves `psi0` through `schedule`, with `static_terms` acting throughout.
pub fn evolve(
    schedule: &Schedule,
    basis: &Basis,
    static_terms: &[Operator],
    psi0: &DVector<C64>,
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    let dim = basis.dim();
    if psi0.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: psi0.len() });
    }
    if (psi0.norm() - 1.0).abs() > 1e-9 {
        return Err(invalid("initial state must be normalized"));
    }
    if !(opts.sample_dt > 0.0) || !(opts.tol > 0.0) {
        return Err(invalid("sample_dt and tol must be positive"));
    }
    let h_static = Operator::sum(dim, static_terms)?;

    let mut psi = psi0.clone();
    let mut t = 0.0;
    let mut samples = alloc::vec![Sample { time: 0.0, state: psi.clone(), norm2: psi.norm_squared() }];
    let mut next_sample = 1u64;

    for (segment, event) in schedule.events().iter().enumerate() {
        let dur = event.duration();
        if dur == 0.0 {
            continue;
        }
        let t_end = t + dur;
        let mut offsets = Vec::new();
        while opts.sample_dt.is_finite() {
            let ts = next_sample as f64 * opts.sample_dt;
            if ts > t_end * (1.0 + 1e-14) {
                break;
            }
            offsets.push((ts - t).clamp(0.0, dur));
            next_sample += 1;
        }
        let mut emit = |psi: &DVector<C64>, time: f64, samples: &mut Vec<Sample>| {
            samples.push(Sample { time, state: psi.clone(), norm2: psi.norm_squared() });
        };
        match event {
            Event::Wait(_) => {
                psi = propagate_constant(&h_static.to_dense(), &h_static, &psi, t, dur, &offsets, &mut samples, &mut emit);
            }
            Event::Pulse(p) => match &p.envelope {
                Envelope::Constant(rabi) => {
                    let h = h_static.plus(&drive_term(basis, p.from, p.to, *rabi, p.phase, p.detuning)?)?;
                    psi = propagate_constant(&h.to_dense(), &h, &psi, t, dur, &offsets, &mut samples, &mut emit);
                }
                Envelope::Sampled { dt, values } => {
                    let h0 = h_static
                        .plus(&drive_term(basis, p.from, p.to, 0.0, 0.0, p.detuning)?)?
                        .to_dense();
                    let h1 = drive_term(basis, p.from, p.to, 1.0, p.phase, 0.0)?.to_dense();
                    let mut stops: Vec<(f64, bool)> = offsets.iter().map(|&o| (o, true)).collect();
                    stops.extend((1..values.len()).map(|k| (k as f64 * dt, false)));
                    stops.sort_by(|a, b| a.0.total_cmp(&b.0));
                    let mut tau = 0.0;
                    for (stop, record) in stops {
                        let stop = stop.min(dur);
                        if stop > tau {
                            psi = dopri5(&h0, &h1, p, &psi, tau, stop, opts, segment, t)?;
                            tau = stop;
                        }
                        if record {
                            emit(&psi, t + stop, &mut samples);
                        }
                    }
                }
            },
        }
        t = t_end;
    }
    if samples.last().map(|s| s.time) != Some(t) {
        samples.push(Sample { time: t, state: psi.clone(), norm2: psi.norm_squared() });
    }
    Ok(EvolutionResult { initial_state: psi0.clone(), final_state: psi, samples })
}

#[allow(clippy::too_many_arguments)]
fn propagate_constant(
    dense: &DMatrix<C64>,
    op: &Operator,
    psi: &DVector<C64>,
    t0: f64,
    dur: f64,
    offsets: &[f64],
    samples: &mut Vec<Sample>,
    emit: &mut impl FnMut(&DVector<C64>, f64, &mut Vec<Sample>),
) -> DVector<C64> {
    let scale = op.max_abs().max(1.0);
    if op.hermiticity_defect() <= 1e-12 * scale {
        let prop = HermitianPropagator::new(dense);
        for &o in offsets {
            emit(&prop.apply(psi, o), t0 + o, samples);
        }
        prop.apply(psi, dur)
    } else {
        let mut cur = psi.clone();
        let mut tau = 0.0;
        let mut cached: Option<(f64, DMatrix<C64>)> = None;
        let mut step = |cur: &DVector<C64>, dt: f64| -> DVector<C64> {
            if dt == 0.0 {
                return cur.clone();
            }
            match &cached {
                Some((d, u)) if (*d - dt).abs() <= 1e-15 * dt => u * cur,
                _ => {
                    let u = propagator(dense, dt);
                    let out = &u * cur;
                    cached = Some((dt, u));
                    out
                }
            }
        };
        for &o in offsets {
            cur = step(&cur, o - tau);
            tau = o;
            emit(&cur, t0 + o, samples);
        }
        step(&cur, dur - tau)
    }
}

/// Adaptive Dormand–Prince 5(4) from `tau0` to `tau1` (times into the pulse).
#[allow(clippy::too_many_arguments)]
fn dopri5(
    h0: &DMatrix<C64>,
    h1: &DMatrix<C64>,
    pulse: &Pulse,
    psi: &DVector<C64>,
    tau0: f64,
    tau1: f64,
    opts: &EvolveOptions,
    segment: usize,
    t_offset: f64,
) -> Result<DVector<C64>> {
    const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] =
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let mi = C64::new(0.0, -1.0);
    let rhs = |tau: f64, y: &DVector<C64>| -> DVector<C64> {
        (h0 * y + h1 * y * C64::new(pulse.rabi_at(tau), 0.0)) * mi
    };
    let span = tau1 - tau0;
    let scale = h0.iter().chain(h1.iter()).map(|x| x.norm()).fold(1e-12, f64::max);
    let mut h = (0.1 / scale).min(span);
    let mut tau = tau0;
    let mut y = psi.clone();
    let mut steps = 0usize;
    while tau < tau1 {
        if steps >= opts.max_steps || h <= span * 1e-15 {
            return Err(Error::Stiffness { segment, time: t_offset + tau });
        }
        steps += 1;
        let h_try = h.min(tau1 - tau);
        let mut k: Vec<DVector<C64>> = Vec::with_capacity(7);
        for s in 0..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    ys += kj * C64::new(h_try * A[s][j], 0.0);
                }
            }
            k.push(rhs(tau + C[s] * h_try, &ys));
        }
        let mut y5 = y.clone();
        let mut err = DVector::<C64>::zeros(y.len());
        for s in 0..7 {
            y5 += &k[s] * C64::new(h_try * B5[s], 0.0);
            err += &k[s] * C64::new(h_try * (B5[s] - B4[s]), 0.0);
        }
        let mut e2 = 0.0;
        for i in 0..y.len() {
            let sc = opts.tol * (1.0 + y[i].norm().max(y5[i].norm()));
            e2 += (err[i].norm() / sc).powi(2);
        }
        let e = (e2 / y.len() as f64).sqrt();
        if e <= 1.0 {
            tau += h_try;
            y = y5;
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        h = h_try * factor;
    }
    Ok(y)
}

/// `|⟨target|state⟩|²`. The state is not renormalized, so decay counts as
/// infidelity.
pub fn fidelity(state: &DVector<C64>, target: &DVector<C64>) -> f64 {
    target.dotc(state).norm_sqr()
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut w = x.sin().atan2(x.cos());
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Shortest signed distance between two angles.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// Phase acquired by basis state `index` between start and end of the run.
///
/// When the all-ground amplitude is present at both ends it serves as the
/// phase reference; otherwise the phase is relative to the initial amplitude
/// of the state itself.
pub fn accumulated_phase(result: &EvolutionResult, index: usize) -> Result<f64> {
    let (ini, fin) = (result.initial_state[index], result.final_state[index]);
    let smallest = ini.norm().min(fin.norm());
    if smallest < PHASE_AMPLITUDE_FLOOR {
        return Err(Error::UndefinedPhase(smallest));
    }
    let mut phase = (fin / ini).arg();
    let g = 0;
    if index != g {
        let (gi, gf) = (result.initial_state[g], result.final_state[g]);
        if gi.norm() >= PHASE_AMPLITUDE_FLOOR && gf.norm() >= PHASE_AMPLITUDE_FLOOR {
            phase -= (gf / gi).arg();
        }
    }
    Ok(wrap_phase(phase))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{dephasing_term, BasisSpec};
    use approx::assert_relative_eq;
    use LevelId::*;

    fn two_level(n: usize) -> Basis {
        BasisSpec::symmetric(n, &[G, R], 1).build().unwrap()
    }

    fn single(p: Pulse) -> Schedule {
        Schedule::from_events(alloc::vec![Event::Pulse(p)]).unwrap()
    }

    #[test]
    fn half_transfer_at_quarter_period() {
        let b = two_level(4);
        let omega = 1.0;
        // population sin²(√N Ω t / 2): one half at √N Ω t = π/2
        let t = PI / 2.0 / (2.0 * omega);
        let r = evolve(&single(Pulse::constant(G, R, omega, 0.0, 0.0, t).unwrap()), &b, &[], &b.ground_vector(), &EvolveOptions::default()).unwrap();
        assert_relative_eq!(r.final_population(0), 0.5, epsilon = 1e-12);
        assert_relative_eq!(r.final_population(1), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn full_transfer() {
        let b = two_level(9);
        let t = PI / 3.0;
        let r = evolve(&single(Pulse::constant(G, R, 1.0, 0.0, 0.0, t).unwrap()), &b, &[], &b.ground_vector(), &EvolveOptions::default()).unwrap();
        let target = b.dicke_vector(&[(R, 1)]).unwrap();
        assert!(fidelity(&r.final_state, &target) > 1.0 - 1e-9);
    }

    #[test]
    fn fidelity_definition() {
        let b = two_level(2);
        let psi = b.dicke_vector(&[(R, 1)]).unwrap();
        assert_relative_eq!(fidelity(&psi, &psi), 1.0, epsilon = 1e-15);
        assert_eq!(fidelity(&b.ground_vector(), &psi), 0.0);
        let shrunk = &psi * C64::new(0.99f64.sqrt(), 0.0);
        assert_relative_eq!(fidelity(&shrunk, &psi), 0.99, epsilon = 1e-14);
    }

    #[test]
    fn free_evolution_has_no_phase() {
        let b = two_level(3);
        let sched = Schedule::from_events(alloc::vec![Event::Wait(2.0)]).unwrap();
        let r = evolve(&sched, &b, &[], &b.ground_vector(), &EvolveOptions::default()).unwrap();
        assert_eq!(accumulated_phase(&r, 0).unwrap(), 0.0);
    }

    #[test]
    fn two_pi_pulse_flips_sign() {
        let b = two_level(1);
        let r = evolve(&single(Pulse::constant(G, R, 2.0, 0.0, 0.0, PI).unwrap()), &b, &[], &b.ground_vector(), &EvolveOptions::default()).unwrap();
        assert!(phase_distance(accumulated_phase(&r, 0).unwrap(), PI) < 1e-10);
        assert!(accumulated_phase(&r, 1).is_err());
    }

    #[test]
    fn detuned_pulse_phase_matches_closed_form() {
        let b = two_level(1);
        let (omega, delta, t) = (0.3, 7.0, 2.3);
        let r = evolve(&single(Pulse::constant(G, R, omega, 0.0, delta, t).unwrap()), &b, &[], &b.ground_vector(), &EvolveOptions::default()).unwrap();
        // H = Δ|r⟩⟨r| + (Ω/2)σx; c_g(t) = e^{−iΔt/2}[cos(Wt/2) + i(Δ/W) sin(Wt/2)]
        let w = (omega * omega + delta * delta).sqrt();
        let cg = C64::from_polar(1.0, -delta * t / 2.0)
            * C64::new((w * t / 2.0).cos(), delta / w * (w * t / 2.0).sin());
        let phase = accumulated_phase(&r, 0).unwrap();
        assert!(phase_distance(phase, cg.arg()) < 1e-10);
        // light-shift estimate: E_g ≈ −Ω²/(4Δ)
        let light_shift = omega * omega / (4.0 * delta) * t;
        assert!(phase_distance(phase, light_shift) < 5e-3);
    }

    #[test]
    fn samples_on_grid() {
        let b = two_level(2);
        let sched = Schedule::from_events(alloc::vec![
            Event::Pulse(Pulse::constant(G, R, 1.0, 0.0, 0.0, 0.25).unwrap()),
            Event::Wait(0.3),
        ])
        .unwrap();
        let r = evolve(&sched, &b, &[], &b.ground_vector(), &EvolveOptions::sampled(0.1)).unwrap();
        let times: Vec<f64> = r.samples.iter().map(|s| s.time).collect();
        assert_eq!(times.len(), 7);
        assert_relative_eq!(times[5], 0.5, epsilon = 1e-12);
        assert_relative_eq!(*times.last().unwrap(), 0.55, epsilon = 1e-12);
        for s in &r.samples {
            assert_relative_eq!(s.norm2, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn held_excitation_decays() {
        let b = two_level(5);
        let gamma = 0.04;
        let d = dephasing_term(&b, gamma).unwrap();
        let psi = b.dicke_vector(&[(R, 1)]).unwrap();
        let sched = Schedule::from_events(alloc::vec![Event::Wait(1.5)]).unwrap();
        let r = evolve(&sched, &b, &[d], &psi, &EvolveOptions::sampled(0.5)).unwrap();
        assert_relative_eq!(r.norm_loss(), 1.0 - (-gamma * 1.5f64).exp(), epsilon = 1e-12);
        assert!(r.samples.windows(2).all(|w| w[1].norm2 <= w[0].norm2));
    }

    #[test]
    fn shaped_pulse_area_sets_rotation() {
        let b = two_level(4);
        // Gaussian-like envelope, collective area √N∫Ω dt = 2π/3
        let n = 201;
        let dt = 0.01;
        let raw: Vec<f64> = (0..n)
            .map(|k| {
                let x = (k as f64 - 100.0) / 35.0;
                (-x * x).exp()
            })
            .collect();
        let p0 = Pulse::shaped(G, R, dt, raw.clone(), 0.0, 0.0).unwrap();
        let target_area = 2.0 * PI / 3.0 / 2.0;
        let s = target_area / p0.area();
        let p = Pulse::shaped(G, R, dt, raw.iter().map(|v| v * s).collect(), 0.3, 0.0).unwrap();
        let r = evolve(&single(p), &b, &[], &b.ground_vector(), &EvolveOptions::default()).unwrap();
        let theta = 2.0 * target_area;
        assert_relative_eq!(r.final_population(1), (theta / 2.0).sin().powi(2), epsilon = 1e-9);
    }

    #[test]
    fn shaped_constant_matches_exact() {
        let b = BasisSpec::symmetric(3, &[G, Q, R], 2).build().unwrap();
        let exact = Pulse::constant(G, R, 1.7, 0.4, 0.9, 1.2).unwrap();
        let shaped = Pulse::shaped(G, R, 0.1, alloc::vec![1.7; 13], 0.4, 0.9).unwrap();
        let opts = EvolveOptions::default();
        let a = evolve(&single(exact), &b, &[], &b.ground_vector(), &opts).unwrap();
        let c = evolve(&single(shaped), &b, &[], &b.ground_vector(), &opts).unwrap();
        assert!((a.final_state - c.final_state).norm() < 1e-8);
    }

    #[test]
    fn stepper_reports_stiffness() {
        let b = two_level(2);
        let p = Pulse::shaped(G, R, 1.0, alloc::vec![1e4, 1e4], 0.0, 0.0).unwrap();
        let opts = EvolveOptions { max_steps: 5, ..Default::default() };
        let err = evolve(&single(p), &b, &[], &b.ground_vector(), &opts).unwrap_err();
        assert!(matches!(err, Error::Stiffness { segment: 0, .. }));
    }

    #[test]
    fn rejects_unnormalized_input() {
        let b = two_level(2);
        let psi = b.ground_vector() * C64::new(2.0, 0.0);
        assert!(evolve(&Schedule::new(), &b, &[], &psi, &EvolveOptions::default()).is_err());
    }

    #[test]
    fn wrap_phase_range() {
        assert_relative_eq!(wrap_phase(PI), PI);
        assert_relative_eq!(wrap_phase(-PI), PI);
        assert_relative_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
        assert!(phase_distance(PI - 1e-3, -PI + 1e-3) < 2.1e-3);
    }
}
