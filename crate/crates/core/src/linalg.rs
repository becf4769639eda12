//! Dense complex matrix helpers on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)] // float methods under no_std
use num_traits::Float;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance for grouping equal eigenvalues of a unitary.
pub const DEGENERACY_TOL: f64 = 1e-9;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Builds a matrix from row-major entries.
pub fn from_rows(n: usize, rows: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(n, n, rows)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

/// `max |(U U^dagger - I)_{ij}|`.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let prod = u * u.adjoint();
    max_abs_diff(&prod, &CMatrix::identity(u.nrows(), u.ncols()))
}

/// Largest absolute off-diagonal entry.
pub fn off_diagonal_norm(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if r != c {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    v
}

/// Hermitian eigendecomposition with ascending eigenvalues; eigenvectors
/// are the columns of the returned matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Real symmetric eigendecomposition, ascending.
pub fn real_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

/// Angle of `z` in `[0, 2 pi)`.
pub fn angle_2pi(z: Complex64) -> f64 {
    let a = z.im.atan2(z.re);
    let two_pi = 2.0 * core::f64::consts::PI;
    let a = if a < 0.0 { a + two_pi } else { a };
    if a >= two_pi - 1e-12 {
        0.0
    } else {
        a
    }
}

/// Multiplies `v` by a phase so its first entry above `tol` in magnitude is
/// real and positive.
pub fn fix_phase(v: &mut CVector, tol: f64) {
    if let Some(k) = v.iter().position(|z| z.norm() > tol) {
        let ph = v[k].conj() / v[k].norm();
        for z in v.iter_mut() {
            *z *= ph;
        }
    }
}

/// Eigendecomposition of a normal (here: unitary) matrix.
///
/// Returns eigenvalues sorted by angle in `[0, 2 pi)` and the matching
/// orthonormal eigenvectors as columns. Within a cluster of equal
/// eigenvalues the basis is canonical: computational basis vectors are
/// projected onto the eigenspace and Gram-Schmidt orthonormalized in index
/// order, then phase-fixed.
pub fn diagonalize_normal(q: &CMatrix) -> (Vec<Complex64>, CMatrix) {
    let n = q.nrows();
    let h1 = (q + q.adjoint()).scale(0.5);
    let h2 = (q - q.adjoint()) * c(0.0, -0.5);
    // A generic real combination separates eigenvalues lying on the unit circle.
    let t = core::f64::consts::SQRT_2 - 0.3;
    let (_, vecs) = hermitian_eigen(&(h1 + h2.scale(t)));
    let mut pairs: Vec<(Complex64, CVector)> = (0..n)
        .map(|k| {
            let v: CVector = vecs.column(k).into_owned();
            let lam = (v.adjoint() * q * &v)[(0, 0)];
            (lam, v)
        })
        .collect();
    pairs.sort_by(|a, b| {
        angle_2pi(a.0)
            .partial_cmp(&angle_2pi(b.0))
            .unwrap_or(core::cmp::Ordering::Equal)
    });

    let mut values = Vec::with_capacity(n);
    let mut columns: Vec<CVector> = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && (pairs[end].0 - pairs[k].0).norm() < DEGENERACY_TOL {
            end += 1;
        }
        let dim = end - k;
        let lam = pairs[k..end].iter().fold(ZERO, |s, p| s + p.0) / dim as f64;
        let basis = canonical_basis(&pairs[k..end].iter().map(|p| p.1.clone()).collect::<Vec<_>>(), n);
        for v in basis {
            values.push(lam);
            columns.push(v);
        }
        k = end;
    }
    let v = CMatrix::from_fn(n, n, |r, c| columns[c][r]);
    (values, v)
}

fn canonical_basis(span: &[CVector], n: usize) -> Vec<CVector> {
    let dim = span.len();
    if dim == 1 {
        let mut v = span[0].clone();
        fix_phase(&mut v, 1e-9);
        return alloc::vec![v];
    }
    // Projector onto the eigenspace.
    let mut proj = CMatrix::zeros(n, n);
    for v in span {
        proj += v * v.adjoint();
    }
    let mut out: Vec<CVector> = Vec::with_capacity(dim);
    for e in 0..n {
        if out.len() == dim {
            break;
        }
        let mut v: CVector = proj.column(e).into_owned();
        for u in &out {
            let ov = (u.adjoint() * &v)[(0, 0)];
            v -= u * ov;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            v /= c(norm, 0.0);
            fix_phase(&mut v, 1e-9);
            out.push(v);
        }
    }
    out
}

/// Singular values of a complex matrix, descending.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// Hermitian part `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Phase-insensitive distance: `min_phi max |a - e^{i phi} b|`, evaluated at
/// the phase aligning the largest entry of `b` with `a`.
pub fn phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut k = 0;
    let mut best = 0.0;
    for (i, z) in b.iter().enumerate() {
        if z.norm() > best {
            best = z.norm();
            k = i;
        }
    }
    if best == 0.0 {
        return max_abs_diff(a, b);
    }
    let ratio = a.as_slice()[k] / b.as_slice()[k];
    let ph = if ratio.norm() > 0.0 { ratio / ratio.norm() } else { ONE };
    max_abs_diff(a, &(b * ph))
}
