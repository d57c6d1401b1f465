use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
// needed for f64 math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{invalid, Error, Result};

/// Largest basis dimension built by default. Propagation is dense, so this
/// also bounds memory and eigensolver cost.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Largest ensemble for which the pair-resolved basis may be built by default.
pub const DEFAULT_PAIR_RESOLVED_LIMIT: usize = 5;

/// Single-atom levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LevelId {
    G,
    Q,
    QPlus,
    QMinus,
    R,
    RPlus,
    RMinus,
    PPrime,
    PDblPrime,
}

impl LevelId {
    pub const ALL: [LevelId; 9] = [
        LevelId::G,
        LevelId::Q,
        LevelId::QPlus,
        LevelId::QMinus,
        LevelId::R,
        LevelId::RPlus,
        LevelId::RMinus,
        LevelId::PPrime,
        LevelId::PDblPrime,
    ];

    /// Levels in the Rydberg manifold; these dephase at `γ_r`.
    pub fn is_rydberg(self) -> bool {
        matches!(
            self,
            LevelId::R | LevelId::RPlus | LevelId::RMinus | LevelId::PPrime | LevelId::PDblPrime
        )
    }

    /// Optically excited Rydberg levels that take part in pair hopping.
    pub fn is_excited_rydberg(self) -> bool {
        matches!(self, LevelId::R | LevelId::RPlus | LevelId::RMinus)
    }

    pub fn name(self) -> &'static str {
        match self {
            LevelId::G => "g",
            LevelId::Q => "q",
            LevelId::QPlus => "q_plus",
            LevelId::QMinus => "q_minus",
            LevelId::R => "r",
            LevelId::RPlus => "r_plus",
            LevelId::RMinus => "r_minus",
            LevelId::PPrime => "p_prime",
            LevelId::PDblPrime => "p_dblprime",
        }
    }

    pub fn from_name(name: &str) -> Option<LevelId> {
        LevelId::ALL.into_iter().find(|l| l.name() == name)
    }
}

impl core::fmt::Display for LevelId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    /// Occupation numbers of permutation-symmetric states.
    Symmetric,
    /// One level per atom.
    PairResolved,
}

/// Everything needed to enumerate a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    pub n_atoms: usize,
    pub levels: Vec<LevelId>,
    /// Cap on the number of atoms outside `g`.
    pub n_max: usize,
    pub mode: BasisMode,
    /// Cap on the number of atoms in the Rydberg manifold. `Some(1)` is the
    /// perfect-blockade limit.
    pub rydberg_cap: Option<usize>,
    pub max_dim: usize,
    pub pair_resolved_limit: usize,
}

impl BasisSpec {
    pub fn symmetric(n_atoms: usize, levels: &[LevelId], n_max: usize) -> Self {
        BasisSpec {
            n_atoms,
            levels: levels.to_vec(),
            n_max,
            mode: BasisMode::Symmetric,
            rydberg_cap: None,
            max_dim: DEFAULT_MAX_DIM,
            pair_resolved_limit: DEFAULT_PAIR_RESOLVED_LIMIT,
        }
    }

    pub fn pair_resolved(n_atoms: usize, levels: &[LevelId], n_max: usize) -> Self {
        BasisSpec {
            mode: BasisMode::PairResolved,
            ..Self::symmetric(n_atoms, levels, n_max)
        }
    }

    pub fn with_rydberg_cap(mut self, cap: usize) -> Self {
        self.rydberg_cap = Some(cap);
        self
    }

    pub fn build(&self) -> Result<Basis> {
        Basis::enumerate(self)
    }
}

/// Enumerated basis. Index 0 is always the all-ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    spec: BasisSpec,
    levels: Vec<LevelId>,
    states: Vec<Vec<u16>>,
    index: BTreeMap<Vec<u16>, usize>,
}

impl Basis {
    /// Enumerates every state allowed by the excitation caps.
    pub fn enumerate(spec: &BasisSpec) -> Result<Basis> {
        let mut levels = spec.levels.clone();
        levels.sort();
        levels.dedup();
        if levels.first() != Some(&LevelId::G) {
            return Err(Error::MissingLevel(LevelId::G));
        }
        if spec.n_atoms == 0 {
            return Err(invalid("n_atoms must be positive"));
        }
        if spec.n_max > spec.n_atoms {
            return Err(invalid("n_max must not exceed n_atoms"));
        }
        if spec.n_atoms > u16::MAX as usize {
            return Err(invalid("n_atoms too large"));
        }
        if spec.mode == BasisMode::PairResolved && spec.n_atoms > spec.pair_resolved_limit {
            return Err(invalid(alloc::format!(
                "pair-resolved mode is limited to {} atoms",
                spec.pair_resolved_limit
            )));
        }
        let mut basis = Basis {
            spec: spec.clone(),
            levels,
            states: Vec::new(),
            index: BTreeMap::new(),
        };
        match spec.mode {
            BasisMode::Symmetric => basis.enumerate_symmetric()?,
            BasisMode::PairResolved => basis.enumerate_pair_resolved()?,
        }
        for (k, s) in basis.states.iter().enumerate() {
            basis.index.insert(s.clone(), k);
        }
        Ok(basis)
    }

    fn push(&mut self, state: Vec<u16>) -> Result<()> {
        if self.states.len() >= self.spec.max_dim {
            return Err(Error::BasisTooLarge {
                dim: self.states.len() + 1,
                cap: self.spec.max_dim,
            });
        }
        self.states.push(state);
        Ok(())
    }

    fn admissible_counts(&self, counts: &[u16]) -> bool {
        let rydberg: usize = self
            .levels
            .iter()
            .zip(counts)
            .filter(|(l, _)| l.is_rydberg())
            .map(|(_, &c)| c as usize)
            .sum();
        if let Some(cap) = self.spec.rydberg_cap {
            if rydberg > cap {
                return false;
            }
        }
        true
    }

    fn enumerate_symmetric(&mut self) -> Result<()> {
        let m = self.levels.len();
        let n = self.spec.n_atoms as u16;
        let pp = self.slot(LevelId::PPrime);
        let pd = self.slot(LevelId::PDblPrime);
        for excitations in 0..=self.spec.n_max as u16 {
            let mut parts = alloc::vec![0u16; m - 1];
            let mut out = Vec::new();
            compositions(excitations, 0, &mut parts, &mut out);
            for p in out {
                let mut occ = Vec::with_capacity(m);
                occ.push(n - excitations);
                occ.extend_from_slice(&p);
                // pair hopping creates p' and p'' together
                if let (Some(a), Some(b)) = (pp, pd) {
                    if occ[a] != occ[b] {
                        continue;
                    }
                }
                if self.admissible_counts(&occ) {
                    self.push(occ)?;
                }
            }
        }
        Ok(())
    }

    fn enumerate_pair_resolved(&mut self) -> Result<()> {
        let n = self.spec.n_atoms;
        let m = self.levels.len();
        for excitations in 0..=self.spec.n_max {
            let mut atoms: Vec<usize> = (0..excitations).collect();
            loop {
                // odometer over non-ground levels of the chosen atoms
                let mut digits = alloc::vec![1u16; excitations];
                loop {
                    let mut s = alloc::vec![0u16; n];
                    for (a, d) in atoms.iter().zip(&digits) {
                        s[*a] = *d;
                    }
                    if self.admissible_counts(&self.counts_of(&s)) {
                        self.push(s)?;
                    }
                    if !advance_odometer(&mut digits, m as u16) {
                        break;
                    }
                }
                if !next_combination(&mut atoms, n) {
                    break;
                }
            }
        }
        Ok(())
    }

    fn counts_of(&self, per_atom: &[u16]) -> Vec<u16> {
        let mut c = alloc::vec![0u16; self.levels.len()];
        for &l in per_atom {
            c[l as usize] += 1;
        }
        c
    }

    pub fn spec(&self) -> &BasisSpec {
        &self.spec
    }

    pub fn mode(&self) -> BasisMode {
        self.spec.mode
    }

    pub fn n_atoms(&self) -> usize {
        self.spec.n_atoms
    }

    pub fn n_max(&self) -> usize {
        self.spec.n_max
    }

    /// Levels present, in canonical order (`g` first).
    pub fn levels(&self) -> &[LevelId] {
        &self.levels
    }

    pub fn has_level(&self, level: LevelId) -> bool {
        self.slot(level).is_some()
    }

    pub fn slot(&self, level: LevelId) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }

    pub(crate) fn require(&self, level: LevelId) -> Result<usize> {
        self.slot(level).ok_or(Error::MissingLevel(level))
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Raw encoding of state `k`: occupations per level slot (symmetric) or
    /// level slot per atom (pair-resolved).
    pub fn state(&self, k: usize) -> &[u16] {
        &self.states[k]
    }

    pub fn lookup(&self, state: &[u16]) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn ground_index(&self) -> usize {
        0
    }

    /// Occupation numbers of state `k`, per level slot.
    pub fn counts(&self, k: usize) -> Vec<u16> {
        match self.spec.mode {
            BasisMode::Symmetric => self.states[k].clone(),
            BasisMode::PairResolved => self.counts_of(&self.states[k]),
        }
    }

    pub fn occupation(&self, k: usize, level: LevelId) -> usize {
        match self.slot(level) {
            None => 0,
            Some(s) => match self.spec.mode {
                BasisMode::Symmetric => self.states[k][s] as usize,
                BasisMode::PairResolved => {
                    self.states[k].iter().filter(|&&l| l as usize == s).count()
                }
            },
        }
    }

    /// Atoms outside `g`.
    pub fn excitations(&self, k: usize) -> usize {
        self.spec.n_atoms - self.occupation(k, LevelId::G)
    }

    /// Atoms in the Rydberg manifold.
    pub fn rydberg_count(&self, k: usize) -> usize {
        self.levels
            .iter()
            .filter(|l| l.is_rydberg())
            .map(|&l| self.occupation(k, l))
            .sum()
    }

    /// Index of the symmetric state with the given non-ground occupations
    /// (symmetric mode only).
    pub fn symmetric_index(&self, occupations: &[(LevelId, usize)]) -> Result<usize> {
        if self.spec.mode != BasisMode::Symmetric {
            return Err(invalid("symmetric_index requires a symmetric basis"));
        }
        let counts = self.target_counts(occupations)?;
        self.lookup(&counts)
            .ok_or_else(|| invalid("requested occupations are outside the basis"))
    }

    fn target_counts(&self, occupations: &[(LevelId, usize)]) -> Result<Vec<u16>> {
        let mut counts = alloc::vec![0u16; self.levels.len()];
        let mut excited = 0usize;
        for &(level, n) in occupations {
            if level == LevelId::G {
                return Err(invalid("give non-ground occupations only"));
            }
            counts[self.require(level)?] += n as u16;
            excited += n;
        }
        if excited > self.spec.n_atoms {
            return Err(invalid("occupations exceed the atom number"));
        }
        counts[0] = (self.spec.n_atoms - excited) as u16;
        Ok(counts)
    }

    /// Normalized permutation-symmetric state with the given non-ground
    /// occupations, in either mode.
    pub fn dicke_vector(&self, occupations: &[(LevelId, usize)]) -> Result<DVector<C64>> {
        let counts = self.target_counts(occupations)?;
        let members: Vec<usize> = (0..self.dim()).filter(|&k| self.counts(k) == counts).collect();
        if members.is_empty() {
            return Err(invalid("requested occupations are outside the basis"));
        }
        let amp = C64::new(1.0 / (members.len() as f64).sqrt(), 0.0);
        let mut v = DVector::zeros(self.dim());
        for k in members {
            v[k] = amp;
        }
        Ok(v)
    }

    pub fn ground_vector(&self) -> DVector<C64> {
        let mut v = DVector::zeros(self.dim());
        v[0] = C64::new(1.0, 0.0);
        v
    }
}

/// Isometry from a symmetric basis into a pair-resolved basis of the same
/// ensemble: column `k` is symmetric state `k` written atom by atom.
pub fn symmetric_isometry(pair: &Basis, sym: &Basis) -> Result<DMatrix<C64>> {
    if pair.mode() != BasisMode::PairResolved || sym.mode() != BasisMode::Symmetric {
        return Err(invalid("expected a pair-resolved and a symmetric basis"));
    }
    if pair.levels != sym.levels || pair.n_atoms() != sym.n_atoms() || pair.n_max() != sym.n_max() {
        return Err(invalid("bases describe different ensembles"));
    }
    let mut s = DMatrix::<C64>::zeros(pair.dim(), sym.dim());
    let mut members = alloc::vec![0usize; sym.dim()];
    for k in 0..pair.dim() {
        if let Some(col) = sym.lookup(&pair.counts(k)) {
            s[(k, col)] = C64::new(1.0, 0.0);
            members[col] += 1;
        }
    }
    for (col, &m) in members.iter().enumerate() {
        if m == 0 {
            return Err(invalid("symmetric state has no pair-resolved members"));
        }
        let norm = 1.0 / (m as f64).sqrt();
        for k in 0..pair.dim() {
            s[(k, col)] *= norm;
        }
    }
    Ok(s)
}

/// All ways to split `total` into `parts.len() - from` ordered parts.
fn compositions(total: u16, from: usize, parts: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
    if from + 1 >= parts.len() {
        if let Some(last) = parts.last_mut() {
            *last = total;
            out.push(parts.clone());
        } else if total == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for v in (0..=total).rev() {
        parts[from] = v;
        compositions(total - v, from + 1, parts, out);
    }
    parts[from] = 0;
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in (i + 1)..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn advance_odometer(d: &mut [u16], base: u16) -> bool {
    for x in d.iter_mut().rev() {
        *x += 1;
        if *x < base {
            return true;
        }
        *x = 1;
    }
    false
}
