//! Dense complex linear-algebra helpers shared by every module.
//!
//! Everything is built on `nalgebra` dynamic matrices. Singular value and
//! non-Hermitian eigen decompositions go through `faer`, which stays accurate
//! on rank-deficient input and has bounded iteration counts.

use faer::{Mat, MatRef};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn from_rows(rows: &[&[Complex64]]) -> CMatrix {
    let r = rows.len();
    let cols = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, cols, |i, j| rows[i][j])
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `‖m - m†‖_F / max(‖m‖_F, tiny)`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let diff = m - m.adjoint();
    frobenius(&diff) / frobenius(m).max(f64::MIN_POSITIVE)
}

/// `(m + m†) / 2`; exactly Hermitian in floating point.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = c(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    out
}

/// The antidiagonal permutation `J`, `J_{ij} = [i + j = n - 1]`.
pub fn antidiagonal(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if i + j + 1 == n { ONE } else { ZERO })
}

/// Entrywise complex conjugate (not the adjoint).
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn to_faer<T: Copy>(m: &DMatrix<T>) -> Mat<T> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer<T: Copy + nalgebra::Scalar>(m: MatRef<'_, T>) -> DMatrix<T> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Full SVD `m = U Σ V†`: the `r × r` unitary `U`, the `min(r, c)` singular
/// values in descending order, and the `c × c` unitary `V`.
pub fn svd(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (CMatrix::identity(r, r), Vec::new(), CMatrix::identity(c, c));
    }
    let f = to_faer(m).svd().expect("SVD converges");
    let s = f.S().column_vector().iter().map(|z| z.re).collect();
    (from_faer(f.U()), s, from_faer(f.V()))
}

/// Real counterpart of [`svd`] with orthogonal factors.
pub fn real_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (DMatrix::identity(r, r), Vec::new(), DMatrix::identity(c, c));
    }
    let f = to_faer(m).svd().expect("SVD converges");
    let s = f.S().column_vector().iter().copied().collect();
    (from_faer(f.U()), s, from_faer(f.V()))
}

/// Singular values sorted in descending order.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("SVD converges")
}

pub fn real_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    to_faer(m).singular_values().expect("SVD converges")
}

/// Full right-singular basis of an `r × c` matrix.
///
/// Returns `c` singular values (descending, zero-padded when `r < c`) and the
/// `c × c` unitary whose columns are the matching right singular vectors.
pub fn right_singular(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let cols = m.ncols();
    let (_, mut sigma, v) = svd(m);
    sigma.resize(cols, 0.0);
    (sigma, v)
}

/// Orthonormal basis of `{x : m x = 0}` as columns, counting singular values
/// at or below `rel_tol · σ_max` as zero.
pub fn real_null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    let (_, sigma, v) = real_svd(m);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().filter(|&&s| s > rel_tol * smax).count();
    v.columns(rank, cols - rank).into_owned()
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(sigma: &[f64], rel_tol: f64) -> usize {
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sigma.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = symmetrize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Principal square root `Ω = M^{1/2}` of a Hermitian positive-definite matrix
/// together with its inverse.
pub fn hermitian_sqrt(m: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let (values, vectors) = hermitian_eigen(m);
    let min = values.first().copied().unwrap_or(1.0);
    if min <= 0.0 {
        return Err(Error::Indefinite(min));
    }
    let scale = |f: &dyn Fn(f64) -> f64| {
        let mut scaled = vectors.clone();
        for (j, &lambda) in values.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        symmetrize(&(scaled * vectors.adjoint()))
    };
    Ok((scale(&|x: f64| x.sqrt()), scale(&|x: f64| 1.0 / x.sqrt())))
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("matrix is singular".into()))
}

/// Eigenvalues and unit-norm eigenvectors of a general complex matrix.
///
/// Defective matrices yield nearly parallel eigenvectors rather than failing;
/// callers judge diagonalizability from their conditioning.
pub fn eigen_general(m: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(Error::dims("square matrix", format!("{}x{}", n, m.ncols())));
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let evd = to_faer(m)
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigen decomposition failed: {e:?}")))?;
    let values: Vec<Complex64> = evd.S().column_vector().iter().copied().collect();
    let mut vectors = from_faer(evd.U());
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    Ok((values, vectors))
}

/// Orthonormalise the given columns in place (modified Gram-Schmidt, two passes).
pub fn orthonormalize_columns(m: &mut CMatrix) {
    let cols = m.ncols();
    for j in 0..cols {
        for _ in 0..2 {
            for k in 0..j {
                let proj = m.column(k).dotc(&m.column(j));
                let ck = m.column(k).clone_owned();
                m.column_mut(j).axpy(-proj, &ck, ONE);
            }
        }
        let norm = m.column(j).norm();
        if norm > 0.0 {
            m.column_mut(j).unscale_mut(norm);
        }
    }
}

/// Greedy multiset matching of two eigenvalue lists; returns the largest
/// pairing distance, or `None` if the lengths differ.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (best, dist) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))?;
        used[best] = true;
        worst = worst.max(dist);
    }
    Some(worst)
}

/// Flatten a complex matrix row-major.
pub fn row_major(m: &CMatrix) -> Vec<Complex64> {
    let (r, cols) = m.shape();
    let mut out = Vec::with_capacity(r * cols);
    for i in 0..r {
        for j in 0..cols {
            out.push(m[(i, j)]);
        }
    }
    out
}
