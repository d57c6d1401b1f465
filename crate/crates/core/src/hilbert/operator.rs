use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Sparse complex matrix over a basis, stored as row-major sorted triplets
/// with duplicates merged.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl Operator {
    pub fn zero(dim: usize) -> Self {
        Operator { dim, entries: Vec::new() }
    }

    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, C64)>) -> Self {
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            debug_assert!(r < dim && c < dim);
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != C64::new(0.0, 0.0));
        Operator { dim, entries: merged }
    }

    pub fn diagonal(values: impl IntoIterator<Item = C64>) -> Self {
        let entries: Vec<_> = values.into_iter().enumerate().map(|(k, v)| (k, k, v)).collect();
        let dim = entries.len();
        Self::from_triplets(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, C64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries
            .binary_search_by(|e| (e.0, e.1).cmp(&(row, col)))
            .map(|k| self.entries[k].2)
            .unwrap_or_default()
    }

    pub fn adjoint(&self) -> Operator {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scaled(&self, s: C64) -> Operator {
        Self::from_triplets(self.dim, self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect())
    }

    pub fn plus(&self, other: &Operator) -> Result<Operator> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let mut e = self.entries.clone();
        e.extend_from_slice(&other.entries);
        Ok(Self::from_triplets(self.dim, e))
    }

    pub fn sum<'a>(dim: usize, ops: impl IntoIterator<Item = &'a Operator>) -> Result<Operator> {
        let mut acc = Operator::zero(dim);
        for op in ops {
            acc = acc.plus(op)?;
        }
        Ok(acc)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }

    /// Largest entry-wise deviation from `A = A†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        match self.plus(&adj.scaled(C64::new(-1.0, 0.0))) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn apply(&self, v: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(self.dim);
        for &(r, c, a) in &self.entries {
            out[r] += a * v[c];
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }
}
