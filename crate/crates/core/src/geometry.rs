//! Static ensemble geometry, pair couplings and splitting statistics.
//!
//! Atoms are frozen at uniformly sampled positions inside an axis-aligned box.
//! Every pair interacts through an isotropic resonant dipole coupling
//! `κ_ij = C₃ / r_ij³`, and the volume scale `κ̄ = C₃ / V` sets the natural
//! unit `x = κ / κ̄` for the splitting distribution.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
// needed for f64 math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;
use rand_core::{RngCore, SeedableRng};

use crate::error::{invalid, Error, Result};

/// Draws allowed per atom before an exclusion constraint is declared infeasible.
pub const MAX_DRAWS_PER_ATOM: usize = 10_000;

pub type Point = [f64; 3];

/// Axis-aligned container, edge lengths in μm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDims {
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
}

impl BoxDims {
    pub fn new(lx: f64, ly: f64, lz: f64) -> Result<Self> {
        let dims = BoxDims { lx, ly, lz };
        if dims.as_array().iter().all(|l| l.is_finite() && *l > 0.0) {
            Ok(dims)
        } else {
            Err(invalid("box dimensions must be finite and positive"))
        }
    }

    pub fn cube(side: f64) -> Result<Self> {
        Self::new(side, side, side)
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.lx, self.ly, self.lz]
    }

    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.lz
    }

    pub fn diagonal(&self) -> f64 {
        (self.lx * self.lx + self.ly * self.ly + self.lz * self.lz).sqrt()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.iter()
            .zip(self.as_array())
            .all(|(&c, l)| (0.0..=l).contains(&c))
    }

    /// The same box with every edge multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.lx * s, self.ly * s, self.lz * s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleGeometry {
    positions: Vec<Point>,
    container: BoxDims,
    seed: u64,
}

impl EnsembleGeometry {
    /// Wraps explicit positions, checking containment.
    pub fn from_positions(positions: Vec<Point>, container: BoxDims, seed: u64) -> Result<Self> {
        if positions.len() < 2 {
            return Err(invalid("an ensemble needs at least two atoms"));
        }
        if let Some(k) = positions.iter().position(|p| !container.contains(p)) {
            return Err(invalid(alloc::format!("atom {k} lies outside the container")));
        }
        Ok(EnsembleGeometry { positions, container, seed })
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn container(&self) -> BoxDims {
        self.container
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions and container scaled by `s` about the origin.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let positions = self
            .positions
            .iter()
            .map(|p| [p[0] * s, p[1] * s, p[2] * s])
            .collect();
        Self::from_positions(positions, self.container.scaled(s)?, self.seed)
    }
}

pub fn distance(a: &Point, b: &Point) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

/// Generator for configuration `index` of a run seeded with `seed`.
///
/// Each configuration reads its own ChaCha stream, so configurations can be
/// drawn in any order (or in parallel) and still agree with a serial run.
pub fn config_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform draw from `[0, 1)` with 53 random mantissa bits.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn sample_with(
    rng: &mut impl RngCore,
    n: usize,
    container: BoxDims,
    seed: u64,
    exclusion_radius: Option<f64>,
) -> Result<EnsembleGeometry> {
    if n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    if let Some(r) = exclusion_radius {
        if !(r.is_finite() && r >= 0.0) {
            return Err(invalid("exclusion radius must be finite and non-negative"));
        }
    }
    let dims = container.as_array();
    let mut positions: Vec<Point> = Vec::with_capacity(n);
    let mut draws = 0usize;
    while positions.len() < n {
        let p = [
            unit_f64(rng) * dims[0],
            unit_f64(rng) * dims[1],
            unit_f64(rng) * dims[2],
        ];
        draws += 1;
        let accepted = match exclusion_radius {
            Some(r) => positions.iter().all(|q| distance(&p, q) >= r),
            None => true,
        };
        if accepted {
            positions.push(p);
        } else if draws > MAX_DRAWS_PER_ATOM * n {
            return Err(Error::InfeasibleExclusion {
                radius: exclusion_radius.unwrap_or(0.0),
                attempts: draws,
            });
        }
    }
    EnsembleGeometry::from_positions(positions, container, seed)
}

/// Samples `n` positions uniformly in `container`.
///
/// With an exclusion radius, candidates closer than the radius to an already
/// accepted atom are rejected and redrawn.
pub fn sample_positions(
    n: usize,
    container: BoxDims,
    seed: u64,
    exclusion_radius: Option<f64>,
) -> Result<EnsembleGeometry> {
    sample_with(&mut config_rng(seed, 0), n, container, seed, exclusion_radius)
}

/// Configuration `index` of the stream keyed by `seed`; the same draws
/// [`config_statistics`] uses.
pub fn sample_indexed(
    n: usize,
    container: BoxDims,
    seed: u64,
    index: u64,
    exclusion_radius: Option<f64>,
) -> Result<EnsembleGeometry> {
    sample_with(&mut config_rng(seed, index), n, container, seed, exclusion_radius)
}

/// Symmetric pair couplings `κ_ij = C₃ / r_ij³` in rad/μs.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    kappa: Vec<f64>,
    c3: f64,
}

impl CouplingMatrix {
    /// Couplings with every pair set to `kappa`.
    pub fn uniform(n: usize, kappa: f64) -> Result<Self> {
        if n < 2 || !(kappa.is_finite() && kappa >= 0.0) {
            return Err(invalid("uniform couplings need n >= 2 and kappa >= 0"));
        }
        let mut k = alloc::vec![kappa; n * n];
        for i in 0..n {
            k[i * n + i] = 0.0;
        }
        Ok(CouplingMatrix { n, kappa: k, c3: f64::NAN })
    }

    /// Couplings from an explicit symmetric matrix (row-major, zero diagonal).
    pub fn from_matrix(n: usize, kappa: Vec<f64>) -> Result<Self> {
        if kappa.len() != n * n || n < 2 {
            return Err(invalid("coupling matrix must be n x n with n >= 2"));
        }
        for i in 0..n {
            if kappa[i * n + i] != 0.0 {
                return Err(invalid("coupling matrix diagonal must vanish"));
            }
            for j in 0..i {
                let (a, b) = (kappa[i * n + j], kappa[j * n + i]);
                if a != b || !(a >= 0.0) {
                    return Err(invalid("coupling matrix must be symmetric and non-negative"));
                }
            }
        }
        Ok(CouplingMatrix { n, kappa, c3: f64::NAN })
    }

    pub fn n_atoms(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.kappa[i * self.n + j]
    }

    /// `C₃`, or NaN when the matrix was not built from a geometry.
    pub fn c3(&self) -> f64 {
        self.c3
    }

    /// Iterates `(i, j, κ_ij)` over pairs with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| ((i + 1)..self.n).map(move |j| (i, j, self.get(i, j))))
    }
}

pub fn coupling_matrix(geom: &EnsembleGeometry, c3: f64) -> Result<CouplingMatrix> {
    if !(c3.is_finite() && c3 > 0.0) {
        return Err(invalid("C3 must be finite and positive"));
    }
    let pos = geom.positions();
    let n = pos.len();
    let mut kappa = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let r = distance(&pos[i], &pos[j]);
            if r == 0.0 {
                return Err(Error::DegenerateGeometry(j, i));
            }
            let k = c3 / (r * r * r);
            kappa[i * n + j] = k;
            kappa[j * n + i] = k;
        }
    }
    Ok(CouplingMatrix { n, kappa, c3 })
}

/// Volume-scale coupling `κ̄ = C₃ / V`.
pub fn kappa_bar(volume: f64, c3: f64) -> f64 {
    c3 / volume
}

pub fn min_pair_splitting(cm: &CouplingMatrix) -> f64 {
    cm.pairs().map(|(_, _, k)| k).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplittingStatistic {
    /// Weakest pair coupling of each configuration.
    MinPair,
    /// Every pair coupling of every configuration.
    AllPairs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingParams {
    pub n_configs: usize,
    pub n_atoms: usize,
    pub container: BoxDims,
    pub c3: f64,
    pub seed: u64,
    pub statistic: SplittingStatistic,
}

impl SplittingParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_configs < 1 {
            return Err(invalid("n_configs must be at least 1"));
        }
        if self.n_atoms < 2 {
            return Err(invalid("n_atoms must be at least 2"));
        }
        if !(self.c3.is_finite() && self.c3 > 0.0) {
            return Err(invalid("C3 must be finite and positive"));
        }
        Ok(())
    }
}

/// Values `x = κ/κ̄` contributed by configuration `index`.
pub fn config_statistics(params: &SplittingParams, index: u64) -> Result<Vec<f64>> {
    let mut rng = config_rng(params.seed, index);
    let geom = sample_with(&mut rng, params.n_atoms, params.container, params.seed, None)?;
    let cm = coupling_matrix(&geom, params.c3)?;
    let kb = kappa_bar(params.container.volume(), params.c3);
    Ok(match params.statistic {
        SplittingStatistic::MinPair => alloc::vec![min_pair_splitting(&cm) / kb],
        SplittingStatistic::AllPairs => cm.pairs().map(|(_, _, k)| k / kb).collect(),
    })
}

/// All statistic values of a run, in configuration order.
pub fn splitting_samples(params: &SplittingParams) -> Result<Vec<f64>> {
    params.validate()?;
    let mut out = Vec::new();
    for index in 0..params.n_configs as u64 {
        out.extend(config_statistics(params, index)?);
    }
    Ok(out)
}

/// Closed interval of `x` on which histogram and analytic density are compared.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Default for Window {
    fn default() -> Self {
        Window { lo: 0.2, hi: 20.0 }
    }
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo > 0.0 && hi > lo && hi.is_finite() {
            Ok(Window { lo, hi })
        } else {
            Err(invalid("window needs 0 < lo < hi < inf"))
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplittingHistogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_samples: u64,
    window: Window,
    in_window: u64,
}

impl SplittingHistogram {
    /// Log-spaced bins over the window, plus one underflow and one overflow
    /// bin when samples fall outside it, so every sample is counted.
    pub fn from_samples(samples: &[f64], window: Window, bins: usize) -> Result<Self> {
        if samples.is_empty() || bins == 0 {
            return Err(invalid("histogram needs samples and at least one bin"));
        }
        if samples.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(invalid("splitting samples must be finite and positive"));
        }
        let vmin = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let vmax = samples.iter().copied().fold(0.0, f64::max);
        let mut edges = Vec::with_capacity(bins + 3);
        if vmin < window.lo {
            edges.push(vmin);
        }
        let ratio = (window.hi / window.lo).ln();
        for k in 0..=bins {
            let e = if k == bins {
                window.hi
            } else {
                window.lo * (ratio * k as f64 / bins as f64).exp()
            };
            edges.push(e);
        }
        if vmax > window.hi {
            edges.push(vmax);
        }
        let mut counts = alloc::vec![0u64; edges.len() - 1];
        for &x in samples {
            let k = edges.partition_point(|&e| e <= x).saturating_sub(1);
            let last = counts.len() - 1;
            counts[k.min(last)] += 1;
        }
        let in_window = samples.iter().filter(|x| window.contains(**x)).count() as u64;
        Ok(SplittingHistogram {
            bin_edges: edges,
            counts,
            n_samples: samples.len() as u64,
            window,
            in_window,
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn bins(&self) -> impl Iterator<Item = HistogramBin> + '_ {
        let n = self.n_samples as f64;
        let f_in = self.in_window as f64 / n;
        let z = analytic_splitting_mass(self.window.lo, self.window.hi);
        self.counts.iter().enumerate().map(move |(k, &count)| {
            let (l, r) = (self.bin_edges[k], self.bin_edges[k + 1]);
            let w = r - l;
            HistogramBin {
                x_left: l,
                x_right: r,
                count,
                density: count as f64 / (n * w),
                analytic_density: f_in * analytic_splitting_mass(l, r) / (z * w),
            }
        })
    }
}

/// One histogram row. `analytic_density` is the caption density renormalized
/// to the window and scaled by the fraction of samples inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub x_left: f64,
    pub x_right: f64,
    pub count: u64,
    pub density: f64,
    pub analytic_density: f64,
}

pub fn splitting_distribution(
    params: &SplittingParams,
    window: Window,
    bins: usize,
) -> Result<SplittingHistogram> {
    SplittingHistogram::from_samples(&splitting_samples(params)?, window, bins)
}

const PDF_EXPONENT: f64 = PI * PI * PI / 18.0;

/// Random-gas approximation `p(x) = √2·π·exp(−π³/(18x²)) / (6x²)`.
pub fn analytic_splitting_pdf(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(invalid("splitting pdf is defined for x > 0"));
    }
    Ok(core::f64::consts::SQRT_2 * PI * (-PDF_EXPONENT / (x * x)).exp() / (6.0 * x * x))
}

/// `∫ p(x) dx` over `[a, b]`, in closed form via `u = 1/x`.
///
/// The caption density carries total mass 1/2 on `(0, ∞)`.
pub fn analytic_splitting_mass(a: f64, b: f64) -> f64 {
    let s = PDF_EXPONENT.sqrt();
    let pref = core::f64::consts::SQRT_2 * PI / 6.0 * PI.sqrt() / (2.0 * s);
    let erf_at = |x: f64| if x.is_infinite() { 0.0 } else if x <= 0.0 { 1.0 } else { libm::erf(s / x) };
    pref * (erf_at(a) - erf_at(b))
}

/// Kolmogorov–Smirnov distance between the in-window samples and the caption
/// density renormalized to unit mass on the window.
pub fn ks_distance(samples: &[f64], window: Window) -> Result<f64> {
    let mut xs: Vec<f64> = samples.iter().copied().filter(|x| window.contains(*x)).collect();
    if xs.is_empty() {
        return Err(invalid("no samples inside the comparison window"));
    }
    xs.sort_by(f64::total_cmp);
    let z = analytic_splitting_mass(window.lo, window.hi);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = analytic_splitting_mass(window.lo, x) / z;
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cube10() -> BoxDims {
        BoxDims::cube(10.0).unwrap()
    }

    #[test]
    fn two_atoms_inside_box() {
        let g = sample_positions(2, cube10(), 1, None).unwrap();
        assert_eq!(g.len(), 2);
        for p in g.positions() {
            assert!(p.iter().all(|c| (0.0..=10.0).contains(c)));
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let a = sample_positions(20, cube10(), 7, None).unwrap();
        let b = sample_positions(20, cube10(), 7, None).unwrap();
        assert_eq!(a, b);
        let c = sample_positions(20, cube10(), 8, None).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn exclusion_radius_respected() {
        let g = sample_positions(30, cube10(), 3, Some(1.5)).unwrap();
        for (i, p) in g.positions().iter().enumerate() {
            for q in &g.positions()[..i] {
                assert!(distance(p, q) >= 1.5);
            }
        }
    }

    #[test]
    fn infeasible_exclusion_is_reported() {
        let err = sample_positions(50, BoxDims::cube(1.0).unwrap(), 0, Some(0.9)).unwrap_err();
        assert!(matches!(err, Error::InfeasibleExclusion { .. }));
    }

    #[test]
    fn rejects_single_atom_and_bad_box() {
        assert!(sample_positions(1, cube10(), 0, None).is_err());
        assert!(BoxDims::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn coupling_at_unit_distance() {
        let g = EnsembleGeometry::from_positions(
            alloc::vec![[1.0, 1.0, 1.0], [2.0, 1.0, 1.0]],
            cube10(),
            0,
        )
        .unwrap();
        let cm = coupling_matrix(&g, 50.0).unwrap();
        assert_relative_eq!(cm.get(0, 1), 50.0, max_relative = 1e-14);
        assert_eq!(cm.get(1, 0), cm.get(0, 1));
        assert_eq!(cm.get(0, 0), 0.0);

        let g2 = EnsembleGeometry::from_positions(
            alloc::vec![[1.0, 1.0, 1.0], [3.0, 1.0, 1.0]],
            cube10(),
            0,
        )
        .unwrap();
        assert_relative_eq!(coupling_matrix(&g2, 50.0).unwrap().get(0, 1), 50.0 / 8.0, max_relative = 1e-14);
    }

    #[test]
    fn coincident_atoms_are_degenerate() {
        let g = EnsembleGeometry::from_positions(
            alloc::vec![[1.0, 2.0, 3.0], [4.0, 4.0, 4.0], [1.0, 2.0, 3.0]],
            cube10(),
            0,
        )
        .unwrap();
        assert_eq!(coupling_matrix(&g, 1.0).unwrap_err(), Error::DegenerateGeometry(0, 2));
    }

    #[test]
    fn coupling_matches_direct_loop() {
        let g = sample_positions(10, cube10(), 11, None).unwrap();
        let c3 = 123.0;
        let cm = coupling_matrix(&g, c3).unwrap();
        let p = g.positions();
        for i in 0..10 {
            for j in 0..10 {
                if i == j {
                    assert_eq!(cm.get(i, j), 0.0);
                    continue;
                }
                let (dx, dy, dz) = (p[i][0] - p[j][0], p[i][1] - p[j][1], p[i][2] - p[j][2]);
                let r2: f64 = dx * dx + dy * dy + dz * dz;
                let expect = c3 / r2.powf(1.5);
                assert_relative_eq!(cm.get(i, j), expect, max_relative = 1e-12);
                let r = r2.sqrt();
                assert_relative_eq!(cm.get(i, j) * r * r * r, c3, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn kappa_bar_values() {
        assert_eq!(kappa_bar(1000.0, 1000.0), 1.0);
        assert_relative_eq!(kappa_bar(500.0, 1000.0), 2.0 * kappa_bar(1000.0, 1000.0));
    }

    #[test]
    fn min_pair_explicit() {
        let cm = CouplingMatrix::from_matrix(
            3,
            alloc::vec![0.0, 3.0, 7.0, 3.0, 0.0, 5.0, 7.0, 5.0, 0.0],
        )
        .unwrap();
        assert_eq!(min_pair_splitting(&cm), 3.0);
        let two = CouplingMatrix::from_matrix(2, alloc::vec![0.0, 4.5, 4.5, 0.0]).unwrap();
        assert_eq!(min_pair_splitting(&two), 4.5);
    }

    #[test]
    fn min_pair_matches_exhaustive_scan() {
        let g = sample_positions(50, cube10(), 5, None).unwrap();
        let cm = coupling_matrix(&g, 10.0).unwrap();
        let mut best = f64::INFINITY;
        for i in 0..50 {
            for j in 0..50 {
                if i != j && cm.get(i, j) < best {
                    best = cm.get(i, j);
                }
            }
        }
        assert_eq!(min_pair_splitting(&cm), best);
        let diag = g.container().diagonal();
        assert!(best >= 10.0 / (diag * diag * diag));
    }

    #[test]
    fn single_config_histogram() {
        let params = SplittingParams {
            n_configs: 1,
            n_atoms: 5,
            container: cube10(),
            c3: 1.0,
            seed: 0,
            statistic: SplittingStatistic::MinPair,
        };
        let h = splitting_distribution(&params, Window::default(), 10).unwrap();
        assert_eq!(h.n_samples, 1);
        assert_eq!(h.counts.iter().sum::<u64>(), 1);
        assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn histogram_counts_everything() {
        let params = SplittingParams {
            n_configs: 500,
            n_atoms: 6,
            container: BoxDims::new(10.0, 5.0, 8.0).unwrap(),
            c3: 2.0,
            seed: 4,
            statistic: SplittingStatistic::AllPairs,
        };
        let samples = splitting_samples(&params).unwrap();
        assert_eq!(samples.len(), 500 * 15);
        let h = SplittingHistogram::from_samples(&samples, Window::default(), 40).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), h.n_samples);
        assert!(h.bin_edges.windows(2).all(|w| w[0] < w[1]));
        let mass: f64 = h.bins().map(|b| b.density * (b.x_right - b.x_left)).sum();
        assert_relative_eq!(mass, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn config_streams_are_order_independent() {
        let params = SplittingParams {
            n_configs: 20,
            n_atoms: 4,
            container: cube10(),
            c3: 1.0,
            seed: 9,
            statistic: SplittingStatistic::MinPair,
        };
        let serial = splitting_samples(&params).unwrap();
        let reversed: Vec<f64> = (0..20u64)
            .rev()
            .map(|i| config_statistics(&params, i).unwrap()[0])
            .collect();
        let forward: Vec<f64> = reversed.into_iter().rev().collect();
        assert_eq!(serial, forward);
    }

    #[test]
    fn pdf_values() {
        let direct = |x: f64| 2f64.sqrt() * PI * (-(PI.powi(3)) / 18.0 / (x * x)).exp() / (6.0 * x * x);
        assert_relative_eq!(analytic_splitting_pdf(10.0).unwrap(), 7.2783e-3, max_relative = 1e-4);
        assert_relative_eq!(
            analytic_splitting_pdf(1.0).unwrap() / analytic_splitting_pdf(2.0).unwrap(),
            direct(1.0) / direct(2.0),
            max_relative = 1e-13
        );
        assert!(analytic_splitting_pdf(0.05).unwrap() < 1e-100);
        assert!(analytic_splitting_pdf(0.0).is_err());
        assert!(analytic_splitting_pdf(-1.0).is_err());
        let tail = 2f64.sqrt() * PI / (6.0 * 1e4);
        assert_relative_eq!(analytic_splitting_pdf(100.0).unwrap(), tail, max_relative = 1e-3);
    }

    #[test]
    fn pdf_mass_matches_quadrature() {
        // composite Simpson on a fine grid
        let (a, b) = (0.3, 7.0);
        let n = 20_000;
        let h = (b - a) / n as f64;
        let mut s = analytic_splitting_pdf(a).unwrap() + analytic_splitting_pdf(b).unwrap();
        for k in 1..n {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += w * analytic_splitting_pdf(a + k as f64 * h).unwrap();
        }
        assert_relative_eq!(analytic_splitting_mass(a, b), s * h / 3.0, max_relative = 1e-9);
        assert_relative_eq!(analytic_splitting_mass(0.0, f64::INFINITY), 0.5, max_relative = 1e-12);
    }

    #[test]
    fn pdf_single_interior_maximum() {
        let xs: Vec<f64> = (1..4000).map(|k| k as f64 * 0.005).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| analytic_splitting_pdf(x).unwrap()).collect();
        let turns = ys.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).count();
        assert_eq!(turns, 1);
        assert!(ys.iter().all(|y| *y >= 0.0));
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        // inverse-cdf samples by bisection on the renormalized mass
        let w = Window::default();
        let z = analytic_splitting_mass(w.lo, w.hi);
        let n = 2000;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let target = (i as f64 + 0.5) / n as f64;
                let (mut lo, mut hi) = (w.lo, w.hi);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if analytic_splitting_mass(w.lo, mid) / z < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect();
        let d = ks_distance(&samples, w).unwrap();
        assert!(d <= 0.5 / n as f64 + 1e-9, "{d}");
    }

    #[test]
    fn scaling_box_scales_couplings() {
        let g = sample_positions(6, cube10(), 2, None).unwrap();
        let s = 0.5;
        let a = coupling_matrix(&g, 3.0).unwrap();
        let b = coupling_matrix(&g.scaled(s).unwrap(), 3.0).unwrap();
        for (i, j, k) in a.pairs() {
            assert_relative_eq!(b.get(i, j), k / (s * s * s), max_relative = 1e-12);
        }
    }
}
