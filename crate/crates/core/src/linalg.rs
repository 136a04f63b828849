//! Small dense complex linear-algebra helpers shared by every module.
//!
//! Everything here works on `nalgebra::DMatrix<Complex<f64>>`; the matrices in
//! this crate are at most a few dozen rows, so no attempt is made at blocking
//! or in-place tricks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Build a matrix from row-major real entries.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> CMatrix {
    assert_eq!(entries.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| real(entries[i * cols + j]))
}

pub fn diagonal(entries: &[C64]) -> CMatrix {
    let n = entries.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { entries[i] } else { ZERO })
}

/// Largest absolute entry; used as the residual norm throughout.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨u|v⟩ with the conjugate on the left argument.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching unitary of eigenvectors (columns).
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    // Symmetrize so tiny anti-Hermitian noise cannot leak into the solver.
    let h = (m + m.adjoint()).scale(0.5);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Applies a real function to the spectrum of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let mapped: Vec<C64> = values.into_iter().map(|x| real(f(x))).collect();
    &vectors * diagonal(&mapped) * vectors.adjoint()
}

/// Square root of a positive semidefinite matrix; round-off negatives clamp to 0.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |x| x.max(0.0).sqrt())
}

/// Inverse square root of a positive definite matrix.
///
/// Fails when the smallest eigenvalue is at or below `threshold`.
pub fn psd_inv_sqrt(m: &CMatrix, threshold: f64) -> Result<CMatrix> {
    let (values, _) = hermitian_eigen(m);
    let smallest = values.first().copied().unwrap_or(0.0);
    if smallest <= threshold {
        return Err(Error::IllConditioned(smallest));
    }
    Ok(hermitian_function(m, |x| 1.0 / x.sqrt()))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Operator (spectral) norm: the largest singular value.
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Polar decomposition `m = U P` of a square matrix with `P = sqrt(m† m)`.
pub fn polar(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "polar decomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let svd = m.clone().svd(true, true);
    let w = svd.u.ok_or_else(|| Error::Numerical("svd did not return U".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::Numerical("svd did not return V^T".into()))?;
    let sigma: Vec<C64> = svd.singular_values.iter().map(|&s| real(s)).collect();
    let unitary = &w * &v_t;
    let positive = v_t.adjoint() * diagonal(&sigma) * &v_t;
    Ok((unitary, positive))
}

/// Commutator norm `max|AB - BA|`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

/// Haar-random unitary via QR of a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g =
        CMatrix::from_fn(n, n, |_, _| c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal)));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let phases: Vec<C64> = (0..n)
        .map(|k| {
            let d = r[(k, k)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                ONE
            }
        })
        .collect();
    q * diagonal(&phases)
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> =
        (0..n).map(|_| c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))).collect();
    let norm = vec_norm(&v);
    v.into_iter().map(|z| z / norm).collect()
}

pub fn column(m: &CMatrix, j: usize) -> Vec<C64> {
    m.column(j).iter().copied().collect()
}

pub fn matrix_from_columns(rows: usize, columns: &[Vec<C64>]) -> CMatrix {
    CMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

pub fn mat_vec(m: &CMatrix, v: &[C64]) -> Vec<C64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}
