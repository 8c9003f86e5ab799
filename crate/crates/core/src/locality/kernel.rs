use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SubsystemMask;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ZERO};
use crate::models::ReducedMetric;

/// Singular values `σ ≤ tol · σ_max · max(rows, cols)` count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

fn check_n(metric: &ReducedMetric, mask: &SubsystemMask) -> Result<()> {
    if metric.n() != mask.n() {
        return Err(Error::dims(format!("mask over {} sites", metric.n()), format!("n = {}", mask.n())));
    }
    Ok(())
}

fn submatrix(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn rank_of(sigma: &[f64], rows: usize, cols: usize, tol: f64) -> usize {
    let smax = sigma.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    let cut = tol * smax * rows.max(cols) as f64;
    sigma.iter().filter(|&&s| s > cut).count()
}

/// `M^{rows, cols}` with both index sets ascending.
pub fn block(metric: &ReducedMetric, rows: &SubsystemMask, cols: &SubsystemMask) -> Result<CMatrix> {
    check_n(metric, rows)?;
    check_n(metric, cols)?;
    Ok(submatrix(metric.matrix(), &rows.indices(), &cols.indices()))
}

/// `K(A)` for the subset encoded by `bits` (site `i` is bit `i − 1`).
///
/// Works directly on the matrix for use in scans; `bits = 0` gives 0 and the
/// full set gives `n`.
pub fn kernel_dim(m: &CMatrix, bits: u64, tol: f64) -> usize {
    let n = m.nrows();
    let (a, ac): (Vec<usize>, Vec<usize>) = (0..n).partition(|&k| bits >> k & 1 == 1);
    if a.is_empty() {
        return 0;
    }
    if ac.is_empty() {
        return a.len();
    }
    let sub = submatrix(m, &ac, &a);
    let sigma = linalg::singular_values(&sub);
    a.len() - rank_of(&sigma, ac.len(), a.len(), tol)
}

/// Orthonormal basis of `ker M^{A'A}` together with `M^{AA}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalObservableBasis {
    pub subsystem: SubsystemMask,
    /// `|A| × K`, orthonormal columns.
    pub kernel_vectors: CMatrix,
    /// `M^{AA}`.
    pub block: CMatrix,
    pub k: usize,
    /// Singular values of `M^{A'A}`, descending (empty when `A = [n]`).
    pub singular_values: Vec<f64>,
}

impl LocalObservableBasis {
    /// `max_μ ‖M^{A'A} w^μ‖`, using the metric the basis was built from.
    pub fn max_residual(&self, metric: &ReducedMetric) -> f64 {
        let Some(comp) = self.subsystem.complement() else {
            return 0.0;
        };
        let off = submatrix(metric.matrix(), &comp.indices(), &self.subsystem.indices());
        let prod = off * &self.kernel_vectors;
        prod.column_iter().map(|col| col.norm()).fold(0.0, f64::max)
    }

    /// A generic unit kernel vector embedded in `C^n`.
    ///
    /// The coefficients come from a ChaCha8 stream with the given seed, so the
    /// witness is reproducible and, with probability one, has no accidental
    /// zeros beyond those forced by the kernel.
    pub fn witness(&self, seed: u64) -> Option<CVector> {
        if self.k == 0 {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = CVector::from_fn(self.k, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let mut w = &self.kernel_vectors * coeffs;
        let norm = w.norm();
        if norm == 0.0 {
            return None;
        }
        w.unscale_mut(norm);
        let mut out = CVector::from_element(self.subsystem.n(), ZERO);
        for (row, idx) in self.subsystem.indices().into_iter().enumerate() {
            out[idx] = w[row];
        }
        Some(out)
    }
}

/// SVD kernel of `M^{A'A}`; `K = n` when `A = [n]`.
pub fn kernel_certificate(metric: &ReducedMetric, a: &SubsystemMask, tol: f64) -> Result<LocalObservableBasis> {
    check_n(metric, a)?;
    let idx = a.indices();
    let blk = submatrix(metric.matrix(), &idx, &idx);
    let Some(comp) = a.complement() else {
        return Ok(LocalObservableBasis {
            subsystem: *a,
            kernel_vectors: CMatrix::identity(idx.len(), idx.len()),
            block: blk,
            k: idx.len(),
            singular_values: Vec::new(),
        });
    };
    let off = submatrix(metric.matrix(), &comp.indices(), &idx);
    let (sigma, v) = linalg::right_singular(&off);
    let rank = rank_of(&sigma, off.nrows(), off.ncols(), tol);
    let k = idx.len() - rank;
    let mut singular_values = sigma;
    singular_values.truncate(off.nrows().min(off.ncols()));
    Ok(LocalObservableBasis {
        subsystem: *a,
        kernel_vectors: v.columns(rank, k).into_owned(),
        block: blk,
        k,
        singular_values,
    })
}

/// `K(A) > K(A − {i})` for every `i ∈ A`, with `K(∅) = 0`.
pub fn is_extensively_local(metric: &ReducedMetric, a: &SubsystemMask, tol: f64) -> Result<bool> {
    check_n(metric, a)?;
    let m = metric.matrix();
    let k = kernel_dim(m, a.bits(), tol);
    Ok(a.indices().into_iter().all(|i| k > kernel_dim(m, a.bits() & !(1u64 << i), tol)))
}

/// Hermitian-pair generators of the local reduced observables on `A`.
///
/// With `g^{μν} = w^μ (w^ν)† M^{AA}` embedded in `A × A`, returns
/// `g^{μμ}`, `g^{μν} + g^{νμ}` and `i (g^{μν} − g^{νμ})` for `μ < ν`. Their real
/// span is `{ Σ α_{μν} g^{μν} : α Hermitian }`.
pub fn observable_generators(basis: &LocalObservableBasis) -> Vec<CMatrix> {
    let n = basis.subsystem.n();
    let idx = basis.subsystem.indices();
    let w = &basis.kernel_vectors;
    let embed = |local: CMatrix| {
        let mut out = CMatrix::zeros(n, n);
        for (r, &i) in idx.iter().enumerate() {
            for (s, &j) in idx.iter().enumerate() {
                out[(i, j)] = local[(r, s)];
            }
        }
        out
    };
    let g = |mu: usize, nu: usize| w.column(mu) * w.column(nu).adjoint() * &basis.block;
    let mut out = Vec::with_capacity(basis.k * basis.k);
    for mu in 0..basis.k {
        out.push(embed(g(mu, mu)));
        for nu in (mu + 1)..basis.k {
            let (a, b) = (g(mu, nu), g(nu, mu));
            out.push(embed(&a + &b));
            out.push(embed((a - b) * linalg::I));
        }
    }
    out
}
