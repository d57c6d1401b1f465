//! Hamiltonian terms.
//!
//! Frequencies are angular (rad/μs). Drive terms follow the rotating-frame
//! form `H = (Ω/2)·e^{iφ}·Σ_i |to_i⟩⟨from_i| + h.c. + Δ·n_to`, so that the
//! collective matrix element `⟨r¹|H|g⟩` equals `√N·Ω/2`.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

use num_complex::Complex64 as C64;
// needed for f64 math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use super::basis::{Basis, BasisMode, LevelId};
use super::operator::Operator;
use crate::error::{invalid, Error, Result};
use crate::geometry::CouplingMatrix;

/// Collective transition operator `Σ_i |to_i⟩⟨from_i| / √N`.
///
/// In symmetric mode the element between occupation states is
/// `√(n_from·(n_to + 1) / N)`; transitions leaving the basis are truncated.
pub fn collective_op(basis: &Basis, from: LevelId, to: LevelId) -> Result<Operator> {
    let f = basis.require(from)?;
    let t = basis.require(to)?;
    let norm = 1.0 / (basis.n_atoms() as f64).sqrt();
    let mut entries = Vec::new();
    if f == t {
        return Ok(number_op(basis, from)?.scaled(C64::new(norm, 0.0)));
    }
    for k in 0..basis.dim() {
        let s = basis.state(k);
        match basis.mode() {
            BasisMode::Symmetric => {
                let (nf, nt) = (s[f], s[t]);
                if nf == 0 {
                    continue;
                }
                let mut target = s.to_vec();
                target[f] -= 1;
                target[t] += 1;
                if let Some(j) = basis.lookup(&target) {
                    let amp = ((nf as f64) * (nt as f64 + 1.0)).sqrt() * norm;
                    entries.push((j, k, C64::new(amp, 0.0)));
                }
            }
            BasisMode::PairResolved => {
                for atom in 0..s.len() {
                    if s[atom] as usize != f {
                        continue;
                    }
                    let mut target = s.to_vec();
                    target[atom] = t as u16;
                    if let Some(j) = basis.lookup(&target) {
                        entries.push((j, k, C64::new(norm, 0.0)));
                    }
                }
            }
        }
    }
    Ok(Operator::from_triplets(basis.dim(), entries))
}

/// Diagonal operator counting atoms in `level`.
pub fn number_op(basis: &Basis, level: LevelId) -> Result<Operator> {
    basis.require(level)?;
    Ok(Operator::from_triplets(
        basis.dim(),
        (0..basis.dim())
            .map(|k| (k, k, C64::new(basis.occupation(k, level) as f64, 0.0)))
            .collect(),
    ))
}

/// Coherent drive on `from → to` with Rabi frequency `rabi`, phase `phase`
/// and detuning `detuning` applied to the `to` level.
pub fn drive_term(
    basis: &Basis,
    from: LevelId,
    to: LevelId,
    rabi: f64,
    phase: f64,
    detuning: f64,
) -> Result<Operator> {
    if from == to {
        return Err(invalid("drive needs two distinct levels"));
    }
    let raise = collective_op(basis, from, to)?;
    let amp = C64::from_polar(rabi / 2.0 * (basis.n_atoms() as f64).sqrt(), phase);
    let coupling = raise.scaled(amp);
    let mut h = coupling.plus(&coupling.adjoint())?;
    if detuning != 0.0 {
        h = h.plus(&number_op(basis, to)?.scaled(C64::new(detuning, 0.0)))?;
    }
    Ok(h)
}

/// How the volume-scale splitting `κ̄` maps onto the pair coupling used by
/// the symmetric model.
///
/// The hopping Hamiltonian couples `|r_i r_j⟩` to the symmetric pair state
/// `(|p'_i p''_j⟩ + |p''_i p'_j⟩)/√2` with element `√2·κ_ij`, which splits the
/// doubly excited doublet by `2√2·κ_ij`. The doublet is also commonly quoted
/// as being split by `κ_ij` itself; the two readings differ by `2√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplittingConvention {
    /// Doublet eigenvalues `±κ̄/2`, i.e. split by exactly `κ̄`.
    #[default]
    HalfSplitting,
    /// Pair coupling `κ_ij = κ̄` inserted literally; eigenvalues `±√2·κ̄`.
    LiteralPair,
}

impl SplittingConvention {
    /// Uniform pair coupling `κ` that realizes volume scale `kappa_bar`.
    pub fn uniform_kappa(self, kappa_bar: f64) -> f64 {
        match self {
            SplittingConvention::HalfSplitting => kappa_bar / (2.0 * SQRT_2),
            SplittingConvention::LiteralPair => kappa_bar,
        }
    }

    /// Magnitude of the doublet eigenvalues for a given `κ̄`.
    pub fn doublet_shift(self, kappa_bar: f64) -> f64 {
        SQRT_2 * self.uniform_kappa(kappa_bar)
    }

    pub fn name(self) -> &'static str {
        match self {
            SplittingConvention::HalfSplitting => "half-splitting",
            SplittingConvention::LiteralPair => "literal-pair",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "half-splitting" => Some(SplittingConvention::HalfSplitting),
            "literal-pair" => Some(SplittingConvention::LiteralPair),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum DipoleCoupling<'a> {
    /// Every pair couples with the same `κ`.
    Uniform(f64),
    /// Geometry-resolved couplings (pair-resolved mode only).
    Pairwise(&'a CouplingMatrix),
}

/// Resonant pair hopping `r + r ↔ p' + p''`.
///
/// For a single excited Rydberg level this is
/// `Σ_{i>j} κ_ij |r_i r_j⟩(⟨p'_i p''_j| + ⟨p'_j p''_i|) + h.c.`. With both
/// `r₊` and `r₋` present only the mixed pair is resonant; it hops through
/// `(|r₊_i r₋_j⟩ + |r₋_i r₊_j⟩)/√2`, which gives it the same doublet splitting
/// as an identical pair. Letting `r₊r₊`, `r₋r₋` and `r₊r₋` share the single
/// `p'p''` channel would leave two unshifted combinations and no blockade.
pub fn dipole_term(basis: &Basis, coupling: DipoleCoupling<'_>) -> Result<Operator> {
    let pp = basis.require(LevelId::PPrime)?;
    let pd = basis.require(LevelId::PDblPrime)?;
    let channels = resonant_pairs(basis);
    if channels.is_empty() {
        return Err(Error::MissingLevel(LevelId::R));
    }
    let mut entries = Vec::new();
    let push = |entries: &mut Vec<(usize, usize, C64)>, target: &[u16], k: usize, amp: f64| {
        if let Some(j) = basis.lookup(target) {
            entries.push((j, k, C64::new(amp, 0.0)));
            entries.push((k, j, C64::new(amp, 0.0)));
        }
    };
    match basis.mode() {
        BasisMode::Symmetric => {
            let kappa = match coupling {
                DipoleCoupling::Uniform(k) => k,
                DipoleCoupling::Pairwise(_) => {
                    return Err(invalid("symmetric mode needs a uniform coupling"))
                }
            };
            for k in 0..basis.dim() {
                let s = basis.state(k);
                let pairs = s[pp];
                if pairs == 0 || s[pd] != pairs {
                    continue;
                }
                let pairs = pairs as f64;
                for &(a, b) in &channels {
                    let mut t = s.to_vec();
                    t[pp] -= 1;
                    t[pd] -= 1;
                    let amp = if a == b {
                        let na = s[a] as f64;
                        kappa * pairs * ((na + 1.0) * (na + 2.0)).sqrt()
                    } else {
                        let (na, nb) = (s[a] as f64, s[b] as f64);
                        kappa * SQRT_2 * pairs * ((na + 1.0) * (nb + 1.0)).sqrt()
                    };
                    t[a] += 1;
                    t[b] += 1;
                    push(&mut entries, &t, k, amp);
                }
            }
        }
        BasisMode::PairResolved => {
            let n = basis.n_atoms();
            let kappa_of = |i: usize, j: usize| -> Result<f64> {
                match coupling {
                    DipoleCoupling::Uniform(k) => Ok(k),
                    DipoleCoupling::Pairwise(cm) => {
                        if cm.n_atoms() != n {
                            Err(invalid("coupling matrix size differs from the atom number"))
                        } else {
                            Ok(cm.get(i, j))
                        }
                    }
                }
            };
            for k in 0..basis.dim() {
                let s = basis.state(k);
                for i in 0..n {
                    if s[i] as usize != pp {
                        continue;
                    }
                    for j in 0..n {
                        if j == i || s[j] as usize != pd {
                            continue;
                        }
                        let kij = kappa_of(i, j)?;
                        for &(a, b) in &channels {
                            let mut t = s.to_vec();
                            t[i] = a as u16;
                            t[j] = b as u16;
                            if a == b {
                                push(&mut entries, &t, k, kij);
                            } else {
                                push(&mut entries, &t, k, kij / SQRT_2);
                                t[i] = b as u16;
                                t[j] = a as u16;
                                push(&mut entries, &t, k, kij / SQRT_2);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Operator::from_triplets(basis.dim(), entries))
}

/// Slot pairs of excited Rydberg levels that hop into `p'p''`.
fn resonant_pairs(basis: &Basis) -> Vec<(usize, usize)> {
    let slot = |l| basis.slot(l);
    let mut out = Vec::new();
    if let Some(r) = slot(LevelId::R) {
        out.push((r, r));
    }
    match (slot(LevelId::RPlus), slot(LevelId::RMinus)) {
        (Some(a), Some(b)) => out.push((a.min(b), a.max(b))),
        (Some(a), None) | (None, Some(a)) => out.push((a, a)),
        (None, None) => {}
    }
    out
}

/// Anti-Hermitian decay `−i(γ_r/2)·n_Rydberg`. The squared norm of a state
/// then decays at `γ_r` per Rydberg-manifold atom.
pub fn dephasing_term(basis: &Basis, gamma_r: f64) -> Result<Operator> {
    if !(gamma_r.is_finite() && gamma_r >= 0.0) {
        return Err(invalid("gamma_r must be finite and non-negative"));
    }
    if gamma_r == 0.0 {
        return Ok(Operator::zero(basis.dim()));
    }
    Ok(Operator::from_triplets(
        basis.dim(),
        (0..basis.dim())
            .map(|k| (k, k, C64::new(0.0, -0.5 * gamma_r * basis.rydberg_count(k) as f64)))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{coupling_matrix, sample_positions, BoxDims};
    use crate::hilbert::{symmetric_isometry, BasisSpec};
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, SymmetricEigen};
    use LevelId::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn collective_raise_from_ground() {
        for n in [1usize, 2, 7, 50] {
            let b = BasisSpec::symmetric(n, &[G, Q], 1).build().unwrap();
            let op = collective_op(&b, G, Q).unwrap();
            let q1 = b.symmetric_index(&[(Q, 1)]).unwrap();
            assert_relative_eq!(op.get(q1, 0).re, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn collective_matches_two_atom_tensor_basis() {
        // |q¹⟩ = (|gq⟩ + |qg⟩)/√2, |q²⟩ = |qq⟩; Σ† = (σ⊗1 + 1⊗σ)/√2
        let s = 1.0 / 2f64.sqrt();
        let q1 = [0.0, s, s, 0.0]; // basis gg, gq, qg, qq
        let raise = |v: [f64; 4]| -> [f64; 4] {
            // σ = |q⟩⟨g| on one atom
            let mut out = [0.0; 4];
            out[2] += v[0]; // gg -> qg (atom 1)
            out[3] += v[1]; // gq -> qq
            out[1] += v[0]; // gg -> gq (atom 2)
            out[3] += v[2]; // qg -> qq
            out.map(|x| x * s)
        };
        let r = raise(q1);
        let expected = r[3];
        let b = BasisSpec::symmetric(2, &[G, Q], 2).build().unwrap();
        let op = collective_op(&b, G, Q).unwrap();
        let (i1, i2) = (
            b.symmetric_index(&[(Q, 1)]).unwrap(),
            b.symmetric_index(&[(Q, 2)]).unwrap(),
        );
        assert_relative_eq!(op.get(i2, i1).re, expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn bosonic_commutator_on_ground() {
        let b = BasisSpec::symmetric(9, &[G, Q], 2).build().unwrap();
        let up = collective_op(&b, G, Q).unwrap().to_dense();
        let down = collective_op(&b, Q, G).unwrap().to_dense();
        let comm = &down * &up - &up * &down;
        let g = b.ground_vector();
        let out = comm * &g;
        assert!((out - g).norm() < 1e-14);
    }

    #[test]
    fn drive_element_is_collective() {
        let b = BasisSpec::symmetric(4, &[G, R], 2).build().unwrap();
        let h = drive_term(&b, G, R, 1.0, 0.0, 0.0).unwrap();
        let r1 = b.symmetric_index(&[(R, 1)]).unwrap();
        assert_relative_eq!(h.get(r1, 0).re, 1.0, max_relative = 1e-14);
        assert!(h.is_hermitian(1e-12));

        let single = BasisSpec::symmetric(1, &[G, R], 1).build().unwrap();
        let h1 = drive_term(&single, G, R, 0.8, 0.0, 0.0).unwrap();
        assert_relative_eq!(h1.get(1, 0).re, 0.4, max_relative = 1e-14);
    }

    #[test]
    fn drive_changes_occupations_by_one() {
        let b = BasisSpec::symmetric(6, &[G, Q, R], 3).build().unwrap();
        let h = drive_term(&b, R, Q, 0.7, 0.3, 0.0).unwrap();
        for &(row, col, _) in h.entries() {
            let dq = b.occupation(row, Q) as i64 - b.occupation(col, Q) as i64;
            let dr = b.occupation(row, R) as i64 - b.occupation(col, R) as i64;
            assert!((dq, dr) == (1, -1) || (dq, dr) == (-1, 1));
        }
    }

    #[test]
    fn detuning_adds_number_operator() {
        let b = BasisSpec::symmetric(3, &[G, R], 2).build().unwrap();
        let h = drive_term(&b, G, R, 0.0, 0.0, 0.5).unwrap();
        let r2 = b.symmetric_index(&[(R, 2)]).unwrap();
        assert_eq!(h.get(r2, r2), c(1.0));
        assert_eq!(h.get(0, 0), c(0.0));
    }

    fn project(iso: &DMatrix<C64>, op: &Operator) -> DMatrix<C64> {
        iso.adjoint() * op.to_dense() * iso
    }

    #[test]
    fn symmetric_subspace_consistency() {
        let levels = [G, Q, R, PPrime, PDblPrime];
        for n in 2..=4 {
            let pr = BasisSpec::pair_resolved(n, &levels, n.min(3)).build().unwrap();
            let sy = BasisSpec::symmetric(n, &levels, n.min(3)).build().unwrap();
            let iso = symmetric_isometry(&pr, &sy).unwrap();
            for (from, to) in [(G, R), (R, Q), (G, Q)] {
                let a = project(&iso, &drive_term(&pr, from, to, 1.3, 0.4, 0.2).unwrap());
                let b = drive_term(&sy, from, to, 1.3, 0.4, 0.2).unwrap().to_dense();
                assert!((a - b).camax() < 1e-10, "drive {from}->{to}, n={n}");
            }
            let kappa = 2.7;
            let a = project(&iso, &dipole_term(&pr, DipoleCoupling::Uniform(kappa)).unwrap());
            let b = dipole_term(&sy, DipoleCoupling::Uniform(kappa)).unwrap().to_dense();
            assert!((a - b).camax() < 1e-10, "dipole n={n}");
        }
    }

    #[test]
    fn mixed_rydberg_pairs_project_consistently() {
        let levels = [G, QPlus, QMinus, RPlus, RMinus, PPrime, PDblPrime];
        let pr = BasisSpec::pair_resolved(3, &levels, 2).build().unwrap();
        let sy = BasisSpec::symmetric(3, &levels, 2).build().unwrap();
        let iso = symmetric_isometry(&pr, &sy).unwrap();
        let a = project(&iso, &dipole_term(&pr, DipoleCoupling::Uniform(1.1)).unwrap());
        let b = dipole_term(&sy, DipoleCoupling::Uniform(1.1)).unwrap().to_dense();
        assert!((a - &b).camax() < 1e-10);
        let rr = sy.symmetric_index(&[(RPlus, 1), (RMinus, 1)]).unwrap();
        let pair = sy.symmetric_index(&[(PPrime, 1), (PDblPrime, 1)]).unwrap();
        assert_relative_eq!(b[(rr, pair)].re, 1.1 * 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn only_the_mixed_pair_hops_when_both_sublevels_exist() {
        let levels = [G, RPlus, RMinus, PPrime, PDblPrime];
        let b = BasisSpec::symmetric(4, &levels, 2).build().unwrap();
        let v = dipole_term(&b, DipoleCoupling::Uniform(1.0)).unwrap();
        for same in [RPlus, RMinus] {
            let k = b.symmetric_index(&[(same, 2)]).unwrap();
            assert!((0..b.dim()).all(|j| v.get(j, k) == c(0.0)));
        }
        let mixed = b.dicke_vector(&[(RPlus, 1), (RMinus, 1)]).unwrap();
        // bright doublet: the mixed pair is fully shifted, no dark remainder
        let out = v.apply(&v.apply(&mixed));
        assert_relative_eq!(out.dotc(&mixed).re, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn two_atom_doublet() {
        let b = BasisSpec::pair_resolved(2, &[G, R, PPrime, PDblPrime], 2).build().unwrap();
        let kappa = 3.0;
        let v = dipole_term(&b, DipoleCoupling::Uniform(kappa)).unwrap();
        let rr = b.lookup(&[1, 1]).unwrap();
        let s_vec = {
            let mut v = nalgebra::DVector::<C64>::zeros(b.dim());
            v[b.lookup(&[2, 3]).unwrap()] = c(1.0 / 2f64.sqrt());
            v[b.lookup(&[3, 2]).unwrap()] = c(1.0 / 2f64.sqrt());
            v
        };
        let mut rr_vec = nalgebra::DVector::<C64>::zeros(b.dim());
        rr_vec[rr] = c(1.0);
        for sign in [1.0, -1.0] {
            let psi = (&rr_vec + &s_vec * c(sign)) * c(1.0 / 2f64.sqrt());
            let out = v.apply(&psi);
            let expect = &psi * c(sign * 2f64.sqrt() * kappa);
            assert!((out - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn single_excitations_are_untouched() {
        let b = BasisSpec::symmetric(8, &[G, R, PPrime, PDblPrime], 3).build().unwrap();
        let v = dipole_term(&b, DipoleCoupling::Uniform(5.0)).unwrap();
        let r1 = b.dicke_vector(&[(R, 1)]).unwrap();
        assert!(v.apply(&r1).norm() == 0.0);
        for &(row, col, _) in v.entries() {
            assert_eq!(b.excitations(row), b.excitations(col));
        }
        assert!(v.is_hermitian(1e-12));
    }

    #[test]
    fn three_atom_doubly_excited_spectrum() {
        let levels = [G, R, PPrime, PDblPrime];
        let geom = sample_positions(3, BoxDims::cube(5.0).unwrap(), 21, None).unwrap();
        let cm = coupling_matrix(&geom, 40.0).unwrap();
        let b = BasisSpec::pair_resolved(3, &levels, 2).build().unwrap();
        let v = dipole_term(&b, DipoleCoupling::Pairwise(&cm)).unwrap();
        let block: Vec<usize> = (0..b.dim()).filter(|&k| b.excitations(k) == 2).collect();
        let dense = v.to_dense();
        let sub = DMatrix::from_fn(block.len(), block.len(), |i, j| dense[(block[i], block[j])]);
        let mut eig: Vec<f64> = SymmetricEigen::new(sub).eigenvalues.iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        // dense oracle: each pair (i,j) contributes ±√2 κ_ij, every other
        // state of the block is dark
        let mut expect: Vec<f64> = Vec::new();
        for (_, _, k) in cm.pairs() {
            expect.push(2f64.sqrt() * k);
            expect.push(-(2f64.sqrt()) * k);
        }
        while expect.len() < block.len() {
            expect.push(0.0);
        }
        expect.sort_by(f64::total_cmp);
        for (a, e) in eig.iter().zip(&expect) {
            assert!((a - e).abs() < 1e-9 * (1.0 + e.abs()), "{a} vs {e}");
        }
        // bright states respect the blockade gap
        let kmin = crate::geometry::min_pair_splitting(&cm);
        for (a, e) in eig.iter().zip(&expect) {
            if *e != 0.0 {
                assert!(a.abs() >= kmin / 2.0);
            }
        }
    }

    #[test]
    fn symmetric_doublet_split_by_kappa_bar() {
        let kb = 10.0;
        let conv = SplittingConvention::HalfSplitting;
        let b = BasisSpec::symmetric(30, &[G, R, PPrime, PDblPrime], 2).build().unwrap();
        let v = dipole_term(&b, DipoleCoupling::Uniform(conv.uniform_kappa(kb))).unwrap();
        let rr = b.symmetric_index(&[(R, 2)]).unwrap();
        let pair = b.symmetric_index(&[(PPrime, 1), (PDblPrime, 1)]).unwrap();
        assert_relative_eq!(v.get(rr, pair).re, kb / 2.0, max_relative = 1e-14);
        assert_relative_eq!(conv.doublet_shift(kb), kb / 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            SplittingConvention::LiteralPair.doublet_shift(kb),
            2f64.sqrt() * kb,
            max_relative = 1e-14
        );
    }

    #[test]
    fn dipole_needs_pair_levels() {
        let b = BasisSpec::symmetric(3, &[G, R], 2).build().unwrap();
        assert_eq!(dipole_term(&b, DipoleCoupling::Uniform(1.0)).unwrap_err(), Error::MissingLevel(PPrime));
    }

    #[test]
    fn dephasing_rates() {
        let b = BasisSpec::symmetric(5, &[G, Q, R, PPrime, PDblPrime], 2).build().unwrap();
        assert!(dephasing_term(&b, 0.0).unwrap().is_zero());
        assert!(dephasing_term(&b, -1.0).is_err());
        let d = dephasing_term(&b, 0.2).unwrap();
        let r1 = b.symmetric_index(&[(R, 1)]).unwrap();
        let r2 = b.symmetric_index(&[(R, 2)]).unwrap();
        let q1 = b.symmetric_index(&[(Q, 1)]).unwrap();
        let pair = b.symmetric_index(&[(PPrime, 1), (PDblPrime, 1)]).unwrap();
        assert_eq!(d.get(r1, r1), C64::new(0.0, -0.1));
        assert_eq!(d.get(r2, r2), C64::new(0.0, -0.2));
        assert_eq!(d.get(pair, pair), C64::new(0.0, -0.2));
        assert_eq!(d.get(q1, q1), c(0.0));
    }
}
