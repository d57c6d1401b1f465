//! Fitting helpers for simulated trajectories.

use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};
// needed for f64 math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Result};

/// Residual of the best fit `a + b·cos(ωt) + c·sin(ωt)` at fixed `ω`.
fn harmonic_residual(times: &[f64], values: &[f64], omega: f64) -> f64 {
    let mut ata = Matrix3::<f64>::zeros();
    let mut aty = Vector3::<f64>::zeros();
    for (&t, &y) in times.iter().zip(values) {
        let row = Vector3::new(1.0, (omega * t).cos(), (omega * t).sin());
        ata += row * row.transpose();
        aty += row * y;
    }
    let coef = match ata.lu().solve(&aty) {
        Some(c) => c,
        None => return f64::INFINITY,
    };
    times
        .iter()
        .zip(values)
        .map(|(&t, &y)| {
            let f = coef[0] + coef[1] * (omega * t).cos() + coef[2] * (omega * t).sin();
            (y - f) * (y - f)
        })
        .sum()
}

/// Angular frequency of a sampled oscillation, searched within a factor two
/// of `guess` by least squares on a single harmonic.
pub fn fit_oscillation_frequency(times: &[f64], values: &[f64], guess: f64) -> Result<f64> {
    if times.len() != values.len() || times.len() < 8 {
        return Err(invalid("frequency fit needs at least eight paired samples"));
    }
    if !(guess.is_finite() && guess > 0.0) {
        return Err(invalid("frequency guess must be positive"));
    }
    let (lo, hi) = (0.5 * guess, 2.0 * guess);
    let n_scan = 2000;
    let grid: Vec<f64> = (0..=n_scan).map(|k| lo + (hi - lo) * k as f64 / n_scan as f64).collect();
    let res: Vec<f64> = grid.iter().map(|&w| harmonic_residual(times, values, w)).collect();
    let best = res
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(n_scan)]);
    // golden-section refinement inside the bracketing cells
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (harmonic_residual(times, values, x1), harmonic_residual(times, values, x2));
    for _ in 0..200 {
        if (b - a) <= 1e-14 * guess {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = harmonic_residual(times, values, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = harmonic_residual(times, values, x2);
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_sin_squared_frequency() {
        let w = 3.7;
        let times: Vec<f64> = (0..300).map(|k| k as f64 * 0.02).collect();
        let pops: Vec<f64> = times.iter().map(|t| (w * t / 2.0).sin().powi(2)).collect();
        let fit = fit_oscillation_frequency(&times, &pops, 3.0).unwrap();
        assert!((fit - w).abs() < 1e-9);
    }

    #[test]
    fn tolerates_offset_and_phase() {
        let w = 0.9;
        let times: Vec<f64> = (0..500).map(|k| k as f64 * 0.05).collect();
        let ys: Vec<f64> = times.iter().map(|t| 0.3 + 0.2 * (w * t + 1.1).cos()).collect();
        let fit = fit_oscillation_frequency(&times, &ys, 1.2).unwrap();
        assert!((fit - w).abs() < 1e-9);
        assert!(fit_oscillation_frequency(&times[..3], &ys[..3], 1.0).is_err());
    }
}
