//! Pulse-sequence compilation.
//!
//! Conventions: every π and 2π pulse runs at phase 0, so a resonant π-pulse
//! maps `|from⟩ → −i|to⟩`. A pulse area θ is the Bloch rotation angle of the
//! addressed two-level pair, `θ = w·T` with `w` the pair's coupling
//! (`√N·Ω` for `|g⟩ ↔ |r¹⟩`). Synthesis phases are solved per step and stored
//! in the emitted pulses.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
// needed for f64 math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{evolve, fidelity, wrap_phase, EvolveOptions, Pulse, Schedule};
use crate::error::{invalid, Error, Result};
use crate::hilbert::{Basis, BasisMode, BasisSpec, LevelId, Operator};

use LevelId::*;

/// Residual amplitude allowed after the emptying sequence.
pub const SYNTHESIS_RESIDUAL_TOL: f64 = 1e-9;

fn check_rate(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(alloc::format!("{name} must be positive and finite")))
    }
}

/// Collective `g → r` pulse of rotation angle `theta`, lasting `θ/(√N·Ω)`.
pub fn rabi_pulse(n_atoms: usize, omega: f64, theta: f64) -> Result<Pulse> {
    check_rate("omega", omega)?;
    if n_atoms == 0 {
        return Err(invalid("need at least one atom"));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(invalid("theta must be finite and non-negative"));
    }
    let t = theta / ((n_atoms as f64).sqrt() * omega);
    Pulse::constant(G, R, omega, 0.0, 0.0, t)
}

/// Pulses taking `|q^m⟩` to `|q^{m+1}⟩`: a collective π-pulse `g → r` of
/// coupling `√(N−m)·Ω`, then a π-pulse `r → q` of coupling `√(m+1)·Ω_q`.
pub fn fock_step(n_atoms: usize, m: usize, omega: f64, omega_q: f64) -> Result<[Pulse; 2]> {
    check_rate("omega", omega)?;
    check_rate("omega_q", omega_q)?;
    if m >= n_atoms {
        return Err(Error::InfeasibleTarget(alloc::format!(
            "cannot store {} excitations in {n_atoms} atoms",
            m + 1
        )));
    }
    let up = PI / (((n_atoms - m) as f64).sqrt() * omega);
    let store = PI / (((m + 1) as f64).sqrt() * omega_q);
    Ok([
        Pulse::constant(G, R, omega, 0.0, 0.0, up)?,
        Pulse::constant(R, Q, omega_q, 0.0, 0.0, store)?,
    ])
}

/// `2·n_target` pulses taking `|g⟩` to `(−1)^{n}|q^{n}⟩`.
pub fn fock_ladder(n_atoms: usize, n_target: usize, omega: f64, omega_q: f64) -> Result<Schedule> {
    check_rate("omega", omega)?;
    check_rate("omega_q", omega_q)?;
    if n_target > n_atoms {
        return Err(Error::InfeasibleTarget(alloc::format!(
            "n_target {n_target} exceeds atom number {n_atoms}"
        )));
    }
    let mut s = Schedule::new();
    for m in 0..n_target {
        for p in fock_step(n_atoms, m, omega, omega_q)? {
            s.push_pulse(p);
        }
    }
    Ok(s)
}

/// `Σ_m α_m |q^m⟩` over an `N`-atom ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSuperposition {
    amplitudes: Vec<C64>,
    n_atoms: usize,
}

impl TargetSuperposition {
    pub fn new(amplitudes: Vec<C64>, n_atoms: usize) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(invalid("target needs at least one amplitude"));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(invalid("amplitudes must be finite"));
        }
        let norm2: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > 1e-9 {
            return Err(invalid(alloc::format!("amplitudes have squared norm {norm2}, expected 1")));
        }
        if amplitudes.len() - 1 > n_atoms {
            return Err(Error::InfeasibleTarget(alloc::format!(
                "{} quanta requested from {n_atoms} atoms",
                amplitudes.len() - 1
            )));
        }
        Ok(TargetSuperposition { amplitudes, n_atoms })
    }

    /// Normalizes `amplitudes` before building.
    pub fn normalized(amplitudes: Vec<C64>, n_atoms: usize) -> Result<Self> {
        let n = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0) {
            return Err(invalid("amplitudes are all zero"));
        }
        Self::new(amplitudes.into_iter().map(|a| a / n).collect(), n_atoms)
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    /// Highest stored quantum number.
    pub fn n(&self) -> usize {
        self.amplitudes.len() - 1
    }

    /// The target as a vector of `basis`.
    pub fn state(&self, basis: &Basis) -> Result<DVector<C64>> {
        let mut v = DVector::zeros(basis.dim());
        for (m, a) in self.amplitudes.iter().enumerate() {
            if *a != C64::new(0.0, 0.0) {
                let occ = if m == 0 { alloc::vec![] } else { alloc::vec![(Q, m)] };
                v += basis.dicke_vector(&occ)? * *a;
            }
        }
        Ok(v)
    }
}

/// Schedule taking `|g⟩` to the target, up to a global phase.
///
/// In the blockaded subspace the states `|q^j⟩` and `|r¹, q^j⟩` form a chain
/// on which each pulse acts as independent two-level rotations. The target is
/// emptied from the top of the chain, each pulse zeroing the highest occupied
/// amplitude, and the inverse of that emptying sequence is returned.
pub fn superposition_schedule(target: &TargetSuperposition, omega: f64, omega_q: f64) -> Result<Schedule> {
    check_rate("omega", omega)?;
    check_rate("omega_q", omega_q)?;
    let n = target.n();
    let big_n = target.n_atoms();
    // chain index 2j = |q^j⟩, 2j+1 = |r¹, q^j⟩
    let mut c = alloc::vec![C64::new(0.0, 0.0); 2 * n + 1];
    for (m, a) in target.amplitudes().iter().enumerate() {
        c[2 * m] = *a;
    }
    let mut emptying = Schedule::new();
    for top in (1..=2 * n).rev() {
        // pairs (low, top) rotated by the pulse and their couplings
        let (from, to, rate, pairs): (_, _, _, Vec<(usize, f64)>) = if top % 2 == 0 {
            let j = top / 2;
            (R, Q, omega_q, (1..=j).map(|i| (2 * i - 1, (i as f64).sqrt() * omega_q)).collect())
        } else {
            let j = (top - 1) / 2;
            (G, R, omega, (0..=j).map(|i| (2 * i, ((big_n - i) as f64).sqrt() * omega)).collect())
        };
        let (lo, hi) = (c[top - 1], c[top]);
        let w_top = pairs.last().map(|p| p.1).unwrap_or(rate);
        let (half_angle, phase) = if hi.norm() == 0.0 {
            (0.0, 0.0)
        } else if lo.norm() == 0.0 {
            (PI / 2.0, 0.0)
        } else {
            (hi.norm().atan2(lo.norm()), wrap_phase(hi.arg() - lo.arg() - PI / 2.0))
        };
        let duration = 2.0 * half_angle / w_top;
        for &(low, w) in &pairs {
            let a = w * duration / 2.0;
            let (ca, cb) = (c[low], c[low + 1]);
            let mi = C64::new(0.0, -1.0);
            c[low] = ca * a.cos() + mi * C64::from_polar(1.0, -phase) * a.sin() * cb;
            c[low + 1] = mi * C64::from_polar(1.0, phase) * a.sin() * ca + cb * a.cos();
        }
        emptying.push_pulse(Pulse::constant(from, to, rate, phase, 0.0, duration)?);
    }
    let residual: f64 = c[1..].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if residual > SYNTHESIS_RESIDUAL_TOL {
        return Err(Error::CompilationFailed(residual));
    }
    Ok(emptying.inverse())
}

/// Three-pulse conditional phase gate: π on `q₋ → r₋`, 2π on `q₊ → r₊`, π on
/// `r₋ → q₋`. Areas refer to a single stored quantum.
pub fn phase_gate_schedule(omega_minus: f64, omega_plus: f64) -> Result<Schedule> {
    check_rate("omega_minus", omega_minus)?;
    check_rate("omega_plus", omega_plus)?;
    let mut s = Schedule::new();
    s.push_pulse(Pulse::constant(QMinus, RMinus, omega_minus, 0.0, 0.0, PI / omega_minus)?);
    s.push_pulse(Pulse::constant(QPlus, RPlus, omega_plus, 0.0, 0.0, 2.0 * PI / omega_plus)?);
    s.push_pulse(Pulse::constant(RMinus, QMinus, omega_minus, 0.0, 0.0, PI / omega_minus)?);
    Ok(s)
}

/// Levels of the `g`, `q`, `r` ladder, plus the pair levels when the
/// blockade is finite.
pub fn ladder_basis(n_atoms: usize, n_max: usize, mode: BasisMode, ideal: bool) -> Result<Basis> {
    let levels: &[LevelId] = if ideal { &[G, Q, R] } else { &[G, Q, R, PPrime, PDblPrime] };
    build(n_atoms, levels, n_max, mode, ideal)
}

/// Levels used by the phase gate.
pub fn gate_basis(n_atoms: usize, mode: BasisMode, ideal: bool) -> Result<Basis> {
    build(n_atoms, &[G, QPlus, QMinus, RPlus, RMinus, PPrime, PDblPrime], 2, mode, ideal)
}

fn build(n_atoms: usize, levels: &[LevelId], n_max: usize, mode: BasisMode, ideal: bool) -> Result<Basis> {
    let mut spec = match mode {
        BasisMode::Symmetric => BasisSpec::symmetric(n_atoms, levels, n_max),
        BasisMode::PairResolved => BasisSpec::pair_resolved(n_atoms, levels, n_max),
    };
    if ideal {
        spec = spec.with_rydberg_cap(1);
    }
    spec.build()
}

/// Computational inputs of the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateInput {
    Ground,
    QPlus,
    QMinus,
    QPlusQMinus,
}

impl GateInput {
    pub const ALL: [GateInput; 4] = [GateInput::Ground, GateInput::QPlus, GateInput::QMinus, GateInput::QPlusQMinus];

    pub fn name(self) -> &'static str {
        match self {
            GateInput::Ground => "g",
            GateInput::QPlus => "q_plus",
            GateInput::QMinus => "q_minus",
            GateInput::QPlusQMinus => "q_plus_q_minus",
        }
    }

    /// Phase the ideal blockade gate imprints.
    pub fn ideal_phase(self) -> f64 {
        match self {
            GateInput::Ground => 0.0,
            _ => PI,
        }
    }

    pub fn state(self, basis: &Basis) -> Result<DVector<C64>> {
        match self {
            GateInput::Ground => Ok(basis.ground_vector()),
            GateInput::QPlus => basis.dicke_vector(&[(QPlus, 1)]),
            GateInput::QMinus => basis.dicke_vector(&[(QMinus, 1)]),
            GateInput::QPlusQMinus => basis.dicke_vector(&[(QPlus, 1), (QMinus, 1)]),
        }
    }
}

/// Phase and fidelity per input, in [`GateInput::ALL`] order. Fidelity is
/// the return probability to the input state, so the imprinted phase does
/// not enter it.
#[derive(Debug, Clone, PartialEq)]
pub struct GateTruthTable {
    pub phases: [f64; 4],
    pub fidelities: [f64; 4],
}

impl GateTruthTable {
    /// `Φ(q₊q₋) − Φ(q₊) − Φ(q₋) + Φ(g)`, wrapped to `(−π, π]`.
    pub fn conditional_phase(&self) -> f64 {
        let p = &self.phases;
        wrap_phase(p[3] - p[1] - p[2] + p[0])
    }

    pub fn phase(&self, input: GateInput) -> f64 {
        self.phases[input as usize]
    }

    pub fn fidelity(&self, input: GateInput) -> f64 {
        self.fidelities[input as usize]
    }
}

/// Runs the four computational inputs through `schedule`.
///
/// Each input is a single symmetric state, so its phase is read from the
/// overlap `⟨ψ_in|ψ_out⟩`; this agrees with per-amplitude phase tracking in
/// symmetric mode and stays defined in pair-resolved mode.
pub fn gate_truth_table(schedule: &Schedule, basis: &Basis, static_terms: &[Operator]) -> Result<GateTruthTable> {
    let mut phases = [0.0; 4];
    let mut fidelities = [0.0; 4];
    for (k, input) in GateInput::ALL.iter().enumerate() {
        let psi = input.state(basis)?;
        let r = evolve(schedule, basis, static_terms, &psi, &EvolveOptions::default())?;
        let overlap = psi.dotc(&r.final_state);
        if overlap.norm() < crate::dynamics::PHASE_AMPLITUDE_FLOOR {
            return Err(Error::UndefinedPhase(overlap.norm()));
        }
        phases[k] = wrap_phase(overlap.arg());
        fidelities[k] = fidelity(&r.final_state, &psi);
    }
    Ok(GateTruthTable { phases, fidelities })
}
