//! Error estimates for blockade protocols and the simulations that check
//! them.

use alloc::vec::Vec;
use core::f64::consts::PI;

// needed for f64 math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{evolve, fidelity, EvolveOptions, Event, Schedule};
use crate::error::{invalid, Result};
use crate::geometry::CouplingMatrix;
use crate::hilbert::{dephasing_term, dipole_term, BasisSpec, DipoleCoupling, LevelId, SplittingConvention};
use crate::protocol::rabi_pulse;
use crate::units::{ns_to_us, FrequencyReading};

use LevelId::*;

/// Physical parameters of one operating point, in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalRegime {
    pub n_atoms: usize,
    /// μm³
    pub volume: f64,
    pub kappa_bar: f64,
    pub gamma_r: f64,
    /// μs
    pub t: f64,
    pub omega: f64,
}

impl PhysicalRegime {
    pub fn validate(&self) -> Result<()> {
        if self.n_atoms < 2 {
            return Err(invalid("regime needs at least two atoms"));
        }
        for (name, v) in [
            ("volume", self.volume),
            ("kappa_bar", self.kappa_bar),
            ("gamma_r", self.gamma_r),
            ("t", self.t),
            ("omega", self.omega),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(alloc::format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn estimate(&self) -> ErrorEstimate {
        ErrorEstimate::new(p_doub_estimate(self.kappa_bar, self.t), p_deph_estimate(self.gamma_r, self.t))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub p_doub: f64,
    pub p_deph: f64,
    /// Independent composition `1 − (1 − p_doub)(1 − p_deph)`.
    pub p_total: f64,
}

impl ErrorEstimate {
    pub fn new(p_doub: f64, p_deph: f64) -> Self {
        let (d, p) = (p_doub.clamp(0.0, 1.0), p_deph.clamp(0.0, 1.0));
        ErrorEstimate { p_doub: d, p_deph: p, p_total: 1.0 - (1.0 - d) * (1.0 - p) }
    }
}

/// `1/(4π(κ̄T)²)`, clamped to `[0, 1]`.
pub fn p_doub_estimate(kappa_bar: f64, t: f64) -> f64 {
    let kt = kappa_bar * t;
    if !(kt > 0.0) {
        return 1.0;
    }
    (1.0 / (4.0 * PI * kt * kt)).min(1.0)
}

/// `min(γ_r·T, 1)`.
pub fn p_deph_estimate(gamma_r: f64, t: f64) -> f64 {
    (gamma_r * t).clamp(0.0, 1.0)
}

/// `(1/N²)·Σ_{i≠j} 1/(κ_ij T)²` over a sampled geometry, clamped to `[0, 1]`.
pub fn geometry_resolved_p_doub(cm: &CouplingMatrix, t: f64) -> f64 {
    let n = cm.n_atoms() as f64;
    let sum: f64 = cm.pairs().map(|(_, _, k)| 2.0 / (k * t).powi(2)).sum();
    (sum / (n * n)).min(1.0)
}

/// `(1/N²)·Σ_{i≠j} (κ̄/κ_ij)²`: the geometry factor that a sampled
/// configuration puts in place of `1/(4π)` in the closed-form estimate.
pub fn geometry_factor(cm: &CouplingMatrix, kappa_bar: f64) -> f64 {
    let n = cm.n_atoms() as f64;
    let sum: f64 = cm.pairs().map(|(_, _, k)| 2.0 * (kappa_bar / k).powi(2)).sum();
    sum / (n * n)
}

/// Least-squares fit of `log y = slope·log x + log prefactor`.
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(invalid("fit needs at least two paired points"));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(invalid("log-log fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(invalid("fit needs distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, (my - slope * mx).exp()))
}

/// `n` points spaced evenly in log between `lo` and `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// Settings of the blockade-leakage simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageSetup {
    pub n_atoms: usize,
    pub omega: f64,
    pub convention: SplittingConvention,
}

impl Default for LeakageSetup {
    fn default() -> Self {
        LeakageSetup { n_atoms: 10, omega: 1.0, convention: SplittingConvention::default() }
    }
}

impl LeakageSetup {
    /// Duration of the collective π-pulse.
    pub fn pulse_duration(&self) -> f64 {
        PI / ((self.n_atoms as f64).sqrt() * self.omega)
    }
}

/// Population left outside `{|g⟩, |r¹⟩}` after a collective π-pulse at
/// blockade strength `κ̄T = kappa_t`.
pub fn simulate_leakage(setup: &LeakageSetup, kappa_t: f64) -> Result<f64> {
    if setup.n_atoms < 2 {
        return Err(invalid("leakage needs at least two atoms"));
    }
    let basis = BasisSpec::symmetric(setup.n_atoms, &[G, R, PPrime, PDblPrime], 2).build()?;
    let t = setup.pulse_duration();
    let kappa = setup.convention.uniform_kappa(kappa_t / t);
    let v = dipole_term(&basis, DipoleCoupling::Uniform(kappa))?;
    let mut s = Schedule::new();
    s.push_pulse(rabi_pulse(setup.n_atoms, setup.omega, PI)?);
    let r = evolve(&s, &basis, &[v], &basis.ground_vector(), &EvolveOptions::default())?;
    let r1 = basis.symmetric_index(&[(R, 1)])?;
    let kept = r.final_population(basis.ground_index()) + r.final_population(r1);
    Ok((r.final_norm2() - kept).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub kappa_t: f64,
    pub p_doub_est: f64,
    pub p_doub_sim: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub prefactor: f64,
}

impl ScalingReport {
    /// Fits the simulated leakage of already computed points.
    pub fn from_points(points: Vec<ScalingPoint>) -> Result<Self> {
        let xs: Vec<f64> = points.iter().map(|p| p.kappa_t).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.p_doub_sim).collect();
        let (slope, prefactor) = log_log_fit(&xs, &ys)?;
        Ok(ScalingReport { points, slope, prefactor })
    }
}

pub fn scaling_point(setup: &LeakageSetup, kappa_t: f64) -> Result<ScalingPoint> {
    if !(kappa_t >= 5.0) {
        return Err(invalid("grid values of kappa_bar*T must be at least 5"));
    }
    Ok(ScalingPoint { kappa_t, p_doub_est: p_doub_estimate(kappa_t, 1.0), p_doub_sim: simulate_leakage(setup, kappa_t)? })
}

/// Simulated leakage against `1/(4π(κ̄T)²)` over a grid of `κ̄T`, with a
/// log-log slope fit.
pub fn blockade_scaling_experiment(setup: &LeakageSetup, grid: &[f64]) -> Result<ScalingReport> {
    let points = grid.iter().map(|&kt| scaling_point(setup, kt)).collect::<Result<Vec<_>>>()?;
    ScalingReport::from_points(points)
}

/// Norm lost by `|r¹⟩` held for `t` under decay rate `gamma_r`.
pub fn dephasing_norm_loss(n_atoms: usize, gamma_r: f64, t: f64) -> Result<f64> {
    let basis = BasisSpec::symmetric(n_atoms, &[G, R], 1).build()?;
    let d = dephasing_term(&basis, gamma_r)?;
    let s = Schedule::from_events(alloc::vec![Event::Wait(t)])?;
    let psi = basis.dicke_vector(&[(R, 1)])?;
    Ok(evolve(&s, &basis, &[d], &psi, &EvolveOptions::default())?.norm_loss())
}

/// Infidelity of a π-pulse compiled for `n_compiled` atoms and run on
/// `n_actual` atoms in the blockade limit.
pub fn atom_number_sensitivity(n_compiled: usize, n_actual: usize, omega: f64) -> Result<f64> {
    if n_actual == 0 {
        return Err(invalid("need at least one atom"));
    }
    let pulse = rabi_pulse(n_compiled, omega, PI)?;
    let basis = BasisSpec::symmetric(n_actual, &[G, R], 1).build()?;
    let s = Schedule::from_events(alloc::vec![Event::Pulse(pulse)])?;
    let r = evolve(&s, &basis, &[], &basis.ground_vector(), &EvolveOptions::default())?;
    Ok(1.0 - fidelity(&r.final_state, &basis.dicke_vector(&[(R, 1)])?))
}

/// Two-level rotation-error prediction `cos²(θ'/2)`, `θ' = π√(N'/N)`.
pub fn rotation_error_estimate(n_compiled: usize, n_actual: usize) -> f64 {
    let theta = PI * (n_actual as f64 / n_compiled as f64).sqrt();
    (theta / 2.0).cos().powi(2)
}

/// One line of the operating-point check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCheck {
    /// κ̄ as quoted, in mega-units.
    pub kappa_bar_mega: f64,
    pub kappa_reading: FrequencyReading,
    pub gamma_reading: FrequencyReading,
    pub estimate: ErrorEstimate,
}

impl RegimeCheck {
    pub fn passes(&self, bound: f64) -> bool {
        self.estimate.p_doub < bound && self.estimate.p_deph <= bound
    }
}

/// Estimates at each quoted `κ̄` (mega-units), pulse length `t_ns` and decay
/// rate `gamma_kilo` (kilo-units), under every combination of unit readings.
pub fn operating_point_check(kappa_bar_mega: &[f64], t_ns: f64, gamma_kilo: f64) -> Vec<RegimeCheck> {
    let t = ns_to_us(t_ns);
    let mut out = Vec::new();
    for &k in kappa_bar_mega {
        for kr in FrequencyReading::BOTH {
            for gr in FrequencyReading::BOTH {
                let kappa_bar = kr.mega_to_internal(k);
                let gamma_r = gr.kilo_to_internal(gamma_kilo);
                out.push(RegimeCheck {
                    kappa_bar_mega: k,
                    kappa_reading: kr,
                    gamma_reading: gr,
                    estimate: ErrorEstimate::new(p_doub_estimate(kappa_bar, t), p_deph_estimate(gamma_r, t)),
                });
            }
        }
    }
    out
}
