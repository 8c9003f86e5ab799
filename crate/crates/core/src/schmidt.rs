//! Operator Schmidt decompositions and locality in a tensor-product picture.
//!
//! A metric on `H_A ⊗ H_B` is written `η = Σ √χ_i η^i_A ⊗ η^i_B` with
//! Hilbert-Schmidt orthonormal factors. An observable of the form `1_A ⊗ O_B`
//! exists iff `O_B` solves `η^j_B O_B = O_B† η^j_B` for every factor, which in
//! turn happens iff the factors are simultaneously block-diagonalizable.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, I, ONE, ZERO};
use num_complex::Complex64;

/// `√χ_i` counts as nonzero above this fraction of `√χ_max`.
pub const SCHMIDT_TOL: f64 = 1e-10;
/// Relative singular-value cut used for the real-linear solution spaces.
pub const SOLVE_TOL: f64 = 1e-9;
/// Identity components below this fraction of a solution's norm are trivial.
pub const NONTRIVIAL_TOL: f64 = 1e-10;
pub const CLUSTER_GAP: f64 = 1e-8;
pub const MAX_REDUCTION_ATTEMPTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bipartition {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl Bipartition {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::Parameter("subsystem dimensions must be positive".into()));
        }
        Ok(Self { dim_a, dim_b })
    }

    /// Splits an `n`-qubit register into the `k` low qubits (B) and the rest (A).
    pub fn qubits(n: usize, k: usize) -> Result<Self> {
        if k > n || n >= usize::BITS as usize {
            return Err(Error::Parameter(format!("cannot split {n} qubits at {k}")));
        }
        Self::new(1 << (n - k), 1 << k)
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    fn check(&self, op: &CMatrix) -> Result<()> {
        if !op.is_square() || op.nrows() != self.total() {
            return Err(Error::dims(
                format!("{0}x{0}", self.total()),
                format!("{}x{}", op.nrows(), op.ncols()),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub parts: Bipartition,
    /// `χ_i`, descending; `min(dim_A², dim_B²)` entries.
    pub coefficients: Vec<f64>,
    pub factors_a: Vec<CMatrix>,
    pub factors_b: Vec<CMatrix>,
    pub schmidt_number: usize,
    /// Whether every factor was chosen Hermitian (the input was Hermitian).
    pub hermitian: bool,
}

impl SchmidtDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let d = self.parts.total();
        let mut out = CMatrix::zeros(d, d);
        for ((chi, a), b) in self.coefficients.iter().zip(&self.factors_a).zip(&self.factors_b) {
            out += linalg::kron(a, b) * c(chi.sqrt(), 0.0);
        }
        out
    }

    /// The factors on B carrying a nonzero coefficient.
    pub fn significant_b(&self) -> &[CMatrix] {
        &self.factors_b[..self.schmidt_number]
    }

    pub fn significant_a(&self) -> &[CMatrix] {
        &self.factors_a[..self.schmidt_number]
    }
}

/// Row-major `vec`: entry `(a, a')` sits at `a·d + a'`.
fn vec_of(m: &CMatrix) -> Vec<Complex64> {
    linalg::row_major(m)
}

fn unvec(v: &[Complex64], d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// Orthonormal Hermitian basis of `d × d` matrices as the columns of a
/// `d² × d²` unitary.
fn hermitian_basis(d: usize) -> CMatrix {
    let mut cols: Vec<CMatrix> = Vec::with_capacity(d * d);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..d {
        let mut e = CMatrix::zeros(d, d);
        e[(k, k)] = ONE;
        cols.push(e);
    }
    for k in 0..d {
        for l in k + 1..d {
            let mut s = CMatrix::zeros(d, d);
            s[(k, l)] = c(r, 0.0);
            s[(l, k)] = c(r, 0.0);
            cols.push(s);
            let mut a = CMatrix::zeros(d, d);
            a[(k, l)] = c(0.0, r);
            a[(l, k)] = c(0.0, -r);
            cols.push(a);
        }
    }
    let mut basis = CMatrix::zeros(d * d, d * d);
    for (j, m) in cols.iter().enumerate() {
        for (i, z) in vec_of(m).into_iter().enumerate() {
            basis[(i, j)] = z;
        }
    }
    basis
}

/// `R[(a a'), (b b')] = op[(a b), (a' b')]`.
fn realign(op: &CMatrix, parts: Bipartition) -> CMatrix {
    let (da, db) = (parts.dim_a, parts.dim_b);
    CMatrix::from_fn(da * da, db * db, |row, col| {
        let (a, a2) = (row / da, row % da);
        let (b, b2) = (col / db, col % db);
        op[(a * db + b, a2 * db + b2)]
    })
}

/// Operator Schmidt decomposition by realignment and SVD.
///
/// Hermitian inputs are expanded in Hermitian bases on both sides, so the
/// coefficient matrix is real and every factor is Hermitian.
pub fn operator_schmidt(op: &CMatrix, parts: Bipartition, tol: f64) -> Result<SchmidtDecomposition> {
    parts.check(op)?;
    if !(tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let (da, db) = (parts.dim_a, parts.dim_b);
    let r = realign(op, parts);
    let hermitian = linalg::hermiticity_deviation(op) <= 1e-12;

    let (sigma, factors_a, factors_b) = if hermitian {
        let ha = hermitian_basis(da);
        let hb = hermitian_basis(db);
        let coeffs = ha.adjoint() * &r * linalg::conj(&hb);
        let real = DMatrix::<f64>::from_fn(coeffs.nrows(), coeffs.ncols(), |i, j| coeffs[(i, j)].re);
        let (u, sigma, v) = linalg::real_svd(&real);
        let expand = |basis: &CMatrix, coeffs: &DMatrix<f64>, k: usize, d: usize| {
            let entries: Vec<Complex64> = (basis * coeffs.column(k).map(|x| c(x, 0.0))).iter().copied().collect();
            linalg::symmetrize(&unvec(&entries, d))
        };
        let fa = (0..sigma.len()).map(|k| expand(&ha, &u, k, da)).collect();
        let fb = (0..sigma.len()).map(|k| expand(&hb, &v, k, db)).collect();
        (sigma, fa, fb)
    } else {
        let (u, sigma, v) = linalg::svd(&r);
        let fa = (0..sigma.len())
            .map(|k| CMatrix::from_fn(da, da, |i, j| u[(i * da + j, k)]))
            .collect();
        let fb = (0..sigma.len())
            .map(|k| CMatrix::from_fn(db, db, |i, j| v[(i * db + j, k)].conj()))
            .collect();
        (sigma, fa, fb)
    };

    let smax = sigma.first().copied().unwrap_or(0.0);
    let schmidt_number = if smax == 0.0 { 0 } else { sigma.iter().filter(|&&s| s > tol * smax).count() };
    Ok(SchmidtDecomposition {
        parts,
        coefficients: sigma.iter().map(|s| s * s).collect(),
        factors_a,
        factors_b,
        schmidt_number,
        hermitian,
    })
}

/// Nontrivial solutions `O` of `E O' = O'† E` for every `E` in `etas`, where
/// `O' = embed(O)` and `O` ranges over `d × d` complex matrices.
///
/// Returns an orthonormal (real Hilbert-Schmidt) basis of the solution space
/// with the identity direction projected out.
fn quasi_hermitian_space(etas: &[CMatrix], d: usize, embed: &dyn Fn(&CMatrix) -> CMatrix) -> Vec<CMatrix> {
    let big = etas[0].nrows();
    let rows_per = big * (big + 1);
    let mut sys = DMatrix::<f64>::zeros(rows_per * etas.len(), 2 * d * d);
    for k in 0..d {
        for l in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit[(k, l)] = ONE;
            let e = embed(&unit);
            for (j, eta) in etas.iter().enumerate() {
                let left = eta * &e;
                let right = e.adjoint() * eta;
                let mut row = j * rows_per;
                for r in 0..big {
                    for b in r..big {
                        let x = left[(r, b)] - right[(r, b)];
                        let y = I * (left[(r, b)] + right[(r, b)]);
                        let col = 2 * (k * d + l);
                        sys[(row, col)] = x.re;
                        sys[(row + 1, col)] = x.im;
                        sys[(row, col + 1)] = y.re;
                        sys[(row + 1, col + 1)] = y.im;
                        row += 2;
                    }
                }
            }
        }
    }
    let null = linalg::real_null_space(&sys, SOLVE_TOL);

    if null.ncols() == 0 {
        return Vec::new();
    }
    // Remove the identity direction, then keep what is left.
    let id = {
        let mut v = DMatrix::<f64>::zeros(2 * d * d, 1);
        for k in 0..d {
            v[(2 * (k * d + k), 0)] = 1.0 / (d as f64).sqrt();
        }
        v
    };
    let projected = &null - &id * (id.transpose() * &null);
    let (u, sigma, _) = linalg::real_svd(&projected);
    let mut out = Vec::new();
    for (k, &s) in sigma.iter().enumerate() {
        if s > NONTRIVIAL_TOL {
            out.push(CMatrix::from_fn(d, d, |i, j| {
                let idx = 2 * (i * d + j);
                c(u[(idx, k)], u[(idx + 1, k)])
            }));
        }
    }
    out
}

fn check_factors(factors: &[CMatrix]) -> Result<usize> {
    let first = factors
        .first()
        .ok_or_else(|| Error::Precondition("at least one factor is required".into()))?;
    let d = first.nrows();
    for f in factors {
        if !f.is_square() || f.nrows() != d {
            return Err(Error::dims(format!("{d}x{d}"), format!("{}x{}", f.nrows(), f.ncols())));
        }
    }
    Ok(d)
}

/// Basis of the nontrivial simultaneous solutions of `η^j O = O† η^j`.
pub fn solve_block_metrics(factors: &[CMatrix]) -> Result<Vec<CMatrix>> {
    let d = check_factors(factors)?;
    Ok(quasi_hermitian_space(factors, d, &|o| o.clone()))
}

/// Basis of nontrivial `O_B` with `1_A ⊗ O_B` quasi-Hermitian for `η`, solved
/// directly on the full space.
pub fn solve_local_b(eta: &CMatrix, parts: Bipartition) -> Result<Vec<CMatrix>> {
    parts.check(eta)?;
    let id = CMatrix::identity(parts.dim_a, parts.dim_a);
    Ok(quasi_hermitian_space(std::slice::from_ref(eta), parts.dim_b, &|o| linalg::kron(&id, o)))
}

/// As [`solve_local_b`] for `O_A ⊗ 1_B`.
pub fn solve_local_a(eta: &CMatrix, parts: Bipartition) -> Result<Vec<CMatrix>> {
    parts.check(eta)?;
    let id = CMatrix::identity(parts.dim_b, parts.dim_b);
    Ok(quasi_hermitian_space(std::slice::from_ref(eta), parts.dim_a, &|o| linalg::kron(o, &id)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Columns grouped block by block.
    pub transform: CMatrix,
    /// Column indices of each block.
    pub blocks: Vec<Vec<usize>>,
    pub seed: u64,
    pub attempts: usize,
    /// Largest off-block entry of `S† η^j S`, relative to its norm.
    pub off_block: f64,
}

/// Single-linkage clusters of `values` with gap `gap`, then merged so that a
/// cluster and its complex conjugate share a block.
fn cluster(values: &[Complex64], gap: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= gap || (values[i] - values[j].conj()).norm() <= gap {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

fn off_block_deviation(s: &CMatrix, factors: &[CMatrix], blocks: &[Vec<usize>]) -> f64 {
    let n = s.ncols();
    let mut block_of = vec![0; n];
    for (b, idx) in blocks.iter().enumerate() {
        for &i in idx {
            block_of[i] = b;
        }
    }
    let mut worst: f64 = 0.0;
    for f in factors {
        let t = s.adjoint() * f * s;
        let scale = linalg::frobenius(&t).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..n {
                if block_of[i] != block_of[j] {
                    worst = worst.max(t[(i, j)].norm() / scale);
                }
            }
        }
    }
    worst
}

/// An invertible `S` with every `S† η^j S` block-diagonal in a nontrivial
/// partition, built from a generic solution of the block-metrics equations.
///
/// `Ok(None)` when no nontrivial solution exists. Defective or unsplittable
/// generic combinations are retried with fresh coefficients; exhausting the
/// retries gives [`Error::ReductionFailed`].
pub fn simultaneous_reduction(factors: &[CMatrix], tol: f64, seed: u64) -> Result<Option<Reduction>> {
    let d = check_factors(factors)?;
    let solutions = solve_block_metrics(factors)?;
    if solutions.is_empty() {
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reason = String::new();
    for attempt in 1..=MAX_REDUCTION_ATTEMPTS {
        let mut o = CMatrix::zeros(d, d);
        for sol in &solutions {
            o += sol * c(rng.random_range(-1.0..1.0), 0.0);
        }
        let (values, vectors) = linalg::eigen_general(&o)?;
        let sv = linalg::singular_values(&vectors);
        let cond = sv[0] / sv[sv.len() - 1].max(f64::MIN_POSITIVE);
        if cond > 1e8 {
            reason = format!("defective combination (cond {cond:.2e})");
            continue;
        }
        let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let blocks = cluster(&values, CLUSTER_GAP * scale);
        if blocks.len() < 2 {
            reason = "combination has a single eigenvalue cluster".into();
            continue;
        }
        let order: Vec<usize> = blocks.iter().flatten().copied().collect();
        let transform = CMatrix::from_fn(d, d, |i, j| vectors[(i, order[j])]);
        let mut start = 0;
        let blocks: Vec<Vec<usize>> = blocks
            .iter()
            .map(|b| {
                let idx = (start..start + b.len()).collect();
                start += b.len();
                idx
            })
            .collect();
        let off_block = off_block_deviation(&transform, factors, &blocks);
        if off_block > tol {
            reason = format!("off-block residual {off_block:.2e}");
            continue;
        }
        return Ok(Some(Reduction {
            transform,
            blocks,
            seed,
            attempts: attempt,
            off_block,
        }));
    }
    Err(Error::ReductionFailed {
        attempts: MAX_REDUCTION_ATTEMPTS,
        reason,
    })
}

fn require_pd(m: CMatrix) -> Result<CMatrix> {
    let min = linalg::hermitian_eigenvalues(&m)[0];
    if min <= 0.0 {
        return Err(Error::Indefinite(min));
    }
    Ok(m)
}

/// `(1 + βσ_x) ⊗ (1 + βσ_x) + β² σ_y ⊗ σ_y`.
pub fn build_eta_min(beta: f64) -> Result<CMatrix> {
    if !beta.is_finite() {
        return Err(Error::Parameter("β must be finite".into()));
    }
    let one = CMatrix::identity(2, 2);
    let sx = linalg::from_rows(&[&[ZERO, ONE], &[ONE, ZERO]]);
    let sy = linalg::from_rows(&[&[ZERO, -I], &[I, ZERO]]);
    let f = &one + &sx * c(beta, 0.0);
    require_pd(linalg::kron(&f, &f) + linalg::kron(&sy, &sy) * c(beta * beta, 0.0))
}

/// `α 1 + Σ_ij E_ij ⊗ E_ij` with `E_ij` the matrix units of the trailing
/// `(min(dim_A, dim_B) − 1)`-block on each side. Positive definite iff `α > 0`.
pub fn build_eta_max(alpha: f64, dim_a: usize, dim_b: usize) -> Result<CMatrix> {
    let parts = Bipartition::new(dim_a, dim_b)?;
    if !alpha.is_finite() {
        return Err(Error::Parameter("α must be finite".into()));
    }
    let r = dim_a.min(dim_b) - 1;
    let mut m = CMatrix::identity(parts.total(), parts.total()) * c(alpha, 0.0);
    for i in 1..=r {
        for j in 1..=r {
            m[(i * dim_b + i, j * dim_b + j)] += ONE;
        }
    }
    require_pd(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub schmidt_number: usize,
    /// `(M − 1)² + 1` with `M = min(dim_A, dim_B)`.
    pub threshold: usize,
    pub solutions_a: usize,
    pub solutions_b: usize,
    /// `"A"` or `"B"`, whichever has the smaller dimension (`"B"` on ties).
    pub smaller_side: &'static str,
    /// Description of any contradiction with the Schmidt-number bounds.
    pub violation: Option<String>,
}

impl BoundsReport {
    pub fn local_observables(&self) -> bool {
        self.solutions_a > 0 || self.solutions_b > 0
    }
}

/// Count local solutions on both sides and compare with the Schmidt-number
/// bounds: product metrics admit observables on both sides, and above the
/// threshold the smaller side admits none.
pub fn schmidt_bounds_check(decomp: &SchmidtDecomposition) -> Result<BoundsReport> {
    let parts = decomp.parts;
    let m = parts.dim_a.min(parts.dim_b);
    let threshold = (m - 1) * (m - 1) + 1;
    let n = decomp.schmidt_number;
    let (solutions_a, solutions_b) = if n == 0 {
        (0, 0)
    } else {
        (
            solve_block_metrics(decomp.significant_a())?.len(),
            solve_block_metrics(decomp.significant_b())?.len(),
        )
    };
    let smaller_side = if parts.dim_a < parts.dim_b { "A" } else { "B" };
    let smaller = if smaller_side == "A" { solutions_a } else { solutions_b };
    let violation = if n == 1 && (parts.dim_a > 1 && solutions_a == 0 || parts.dim_b > 1 && solutions_b == 0) {
        Some("product metric without local observables".to_string())
    } else if n > threshold && smaller > 0 {
        Some(format!("Schmidt number {n} > {threshold} yet side {smaller_side} has observables"))
    } else {
        None
    };
    Ok(BoundsReport {
        schmidt_number: n,
        threshold,
        solutions_a,
        solutions_b,
        smaller_side,
        violation,
    })
}
