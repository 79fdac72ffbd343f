//! Seeded random operators for corpus generation and property tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::numerics::{hermitize, CMatrix, C64};

fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. complex Gaussian entries of unit variance per part.
pub fn complex_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| C64::new(standard_normal(rng), standard_normal(rng)))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> CMatrix {
    hermitize(&complex_matrix(rng, dim)).scale(scale)
}

/// Haar-ish unitary from the QR factor of a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = complex_matrix(rng, dim).qr();
    qr.q()
}

/// Full-rank density matrix `G G† / Tr(G G†)`.
pub fn density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let g = complex_matrix(rng, dim);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    hermitize(&rho.unscale(tr))
}

pub fn pure_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..dim)
        .map(|_| C64::new(standard_normal(rng), standard_normal(rng)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}
