//! Dense propagators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
// needed for f64 math when std is absent from the build
#[allow(unused_imports)]
use num_traits::Float;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Spectral form of a Hermitian generator, giving `exp(−iHt)` for any `t`.
#[derive(Debug, Clone)]
pub struct HermitianPropagator {
    energies: DVector<f64>,
    vectors: DMatrix<C64>,
}

impl HermitianPropagator {
    pub fn new(h: &DMatrix<C64>) -> Self {
        // symmetrize so round-off cannot leak an anti-Hermitian part in
        let hs = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(hs);
        HermitianPropagator { energies: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    pub fn energies(&self) -> &DVector<f64> {
        &self.energies
    }

    /// `exp(−iHt)·ψ`.
    pub fn apply(&self, psi: &DVector<C64>, t: f64) -> DVector<C64> {
        let mut c = self.vectors.ad_mul(psi);
        for (ck, &e) in c.iter_mut().zip(self.energies.iter()) {
            *ck *= C64::from_polar(1.0, -e * t);
        }
        &self.vectors * c
    }
}

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by degree-13 Padé approximation with scaling and
/// squaring.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = a * C64::new(2f64.powi(-s), 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let c = |x: f64| C64::new(x, 0.0);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]))
        + &a6 * c(B[7])
        + &a4 * c(B[5])
        + &a2 * c(B[3])
        + &id * c(B[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]))
        + &a6 * c(B[6])
        + &a4 * c(B[4])
        + &a2 * c(B[2])
        + &id * c(B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).unwrap_or_else(|| id.clone());
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// `exp(−iHt)` for a general (possibly non-Hermitian) generator.
pub fn propagator(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    expm(&(h * (-I * t)))
}
