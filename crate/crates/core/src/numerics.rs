//! Dense complex matrix primitives.
//!
//! Everything here works on small (`dim <= 64`) dense matrices. The trace
//! norm carries a factor of one half, so orthogonal pure states sit at trace
//! distance exactly one.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{QslError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const DEFAULT_HERM_TOL: f64 = 1e-10;
pub const DEFAULT_P_FLOOR: f64 = 1e-12;

/// Spectral decomposition of a Hermitian matrix.
///
/// `values` are ascending; column `k` of `vectors` is the eigenvector for
/// `values[k]`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V f(Λ) V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let diag = DVector::from_iterator(self.dim(), self.values.iter().map(|&v| c(f(v))));
        &self.vectors * CMatrix::from_diagonal(&diag) * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map(|v| v)
    }

    /// Express `m` in this eigenbasis: `V† m V`.
    pub fn to_basis(&self, m: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }

    /// Inverse of [`EigenSystem::to_basis`].
    pub fn from_basis(&self, m: &CMatrix) -> CMatrix {
        &self.vectors * m * self.vectors.adjoint()
    }

    /// Groups of consecutive indices whose eigenvalues chain together with
    /// gaps below `tol`.
    pub fn clusters(&self, tol: f64) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(last) if (v - self.values[*last.last().unwrap()]).abs() < tol => last.push(k),
                _ => out.push(vec![k]),
            }
        }
        out
    }
}

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `max |M - M†|` over entries.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(QslError::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if !is_finite(m) {
        return Err(QslError::NonFinite);
    }
    Ok(())
}

pub fn check_hermitian(m: &CMatrix, herm_tol: f64) -> Result<()> {
    check_square(m)?;
    let deviation = hermitian_deviation(m);
    if deviation > herm_tol {
        return Err(QslError::NonHermitianInput { deviation });
    }
    Ok(())
}

fn check_same_dim(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(QslError::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(())
}

/// Hermitian eigendecomposition with ascending eigenvalues.
pub fn eigh(m: &CMatrix, herm_tol: f64) -> Result<EigenSystem> {
    check_hermitian(m, herm_tol)?;
    Ok(eigh_unchecked(m))
}

/// Eigendecomposition of the Hermitian part of `m`; no tolerance check.
pub fn eigh_unchecked(m: &CMatrix) -> EigenSystem {
    let n = m.nrows();
    let eig = nalgebra::SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    EigenSystem { values, vectors }
}

/// `(1/2) Tr sqrt(X† X)`: half the sum of singular values.
pub fn trace_norm(x: &CMatrix) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    0.5 * x.singular_values().iter().sum::<f64>()
}

/// `T(a, b) = ||a - b||_tr`.
pub fn trace_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    check_same_dim(a, b)?;
    Ok(trace_norm(&(a - b)))
}

/// `ln ρ` on the spectral decomposition of a density matrix, with
/// eigenvalues below `p_floor` clamped to `ln(p_floor)`.
pub fn log_on_support(spectrum: &EigenSystem, p_floor: f64) -> CMatrix {
    spectrum.map(|p| p.max(p_floor).ln())
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_same_dim(a, b)?;
    Ok(a * b - b * a)
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

/// `Tr[A B]` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|&v| c(v))))
}

/// Pauli matrices and other fixed small operators.
pub mod pauli {
    use super::{c, CMatrix, C64};

    pub fn identity(dim: usize) -> CMatrix {
        CMatrix::identity(dim, dim)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    pub fn y() -> CMatrix {
        let i = C64::new(0.0, 1.0);
        CMatrix::from_row_slice(2, 2, &[c(0.0), -i, i, c(0.0)])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn ket_bra(dim: usize, i: usize, j: usize) -> CMatrix {
        let mut m = CMatrix::zeros(dim, dim);
        m[(i, j)] = c(1.0);
        m
    }
}
