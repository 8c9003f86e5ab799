//! The `2^n`-dimensional Fock space of `n` fermionic modes.
//!
//! Basis convention: basis index `b` encodes occupations, bit `i − 1` being
//! the occupation of site `i`, and `|b⟩ = Π_{i ascending} (a†_i)^{b_i} |0⟩`.
//! With this ordering `a†_j` carries the sign `(−1)^{#occupied sites < j}`,
//! i.e. the Jordan-Wigner string runs over lower sites. The vacuum is index 0.

mod oracle;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, ONE, ZERO};
use crate::locality::SubsystemMask;
use crate::models::ReducedMetric;

pub use oracle::{brute_force_locality, brute_force_scan, BruteForceOptions, BruteForceResult, OracleRow};

/// Default largest `n` for the brute-force oracle (`2^7 = 128` states).
pub const ORACLE_CAP: usize = 7;

/// Hard limit on the dense Fock-space dimension.
pub const MAX_FOCK_SITES: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    n: usize,
}

impl FockSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_FOCK_SITES {
            return Err(Error::Parameter(format!("Fock space needs 1 <= n <= {MAX_FOCK_SITES}, got {n}")));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn vacuum(&self) -> CVector {
        let mut v = CVector::zeros(self.dim());
        v[0] = ONE;
        v
    }

    /// Basis indices with exactly `count` particles, ascending.
    pub fn sector(&self, count: usize) -> Vec<usize> {
        (0..self.dim()).filter(|b| b.count_ones() as usize == count).collect()
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site < 1 || site > self.n {
            return Err(Error::Parameter(format!("site {site} outside 1..={}", self.n)));
        }
        Ok(())
    }

    fn check_matrix(&self, m: &CMatrix) -> Result<()> {
        if m.shape() != (self.dim(), self.dim()) {
            return Err(Error::dims(format!("{0}x{0}", self.dim()), format!("{}x{}", m.nrows(), m.ncols())));
        }
        Ok(())
    }
}

/// A dense operator on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub space: FockSpace,
    pub matrix: CMatrix,
}

impl FockOperator {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        space.check_matrix(&matrix)?;
        Ok(Self { space, matrix })
    }

    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            matrix: CMatrix::identity(space.dim(), space.dim()),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn mul(&self, other: &FockOperator) -> Self {
        Self {
            space: self.space,
            matrix: &self.matrix * &other.matrix,
        }
    }

    pub fn anticommutator(&self, other: &FockOperator) -> CMatrix {
        &self.matrix * &other.matrix + &other.matrix * &self.matrix
    }

    pub fn commutator(&self, other: &FockOperator) -> CMatrix {
        &self.matrix * &other.matrix - &other.matrix * &self.matrix
    }

    /// True if the operator commutes with the total particle number.
    pub fn conserves_number(&self, tol: f64) -> bool {
        let cut = tol * linalg::max_abs(&self.matrix).max(f64::MIN_POSITIVE);
        let dim = self.space.dim();
        (0..dim).all(|r| (0..dim).all(|b| r.count_ones() == b.count_ones() || self.matrix[(r, b)].norm() <= cut))
    }
}

/// `(−1)^{popcount(b & below)}` as `±1.0`.
#[inline]
pub(crate) fn string_sign(b: usize, below: usize) -> f64 {
    if (b & below).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn qubit_of(space: &FockSpace, site: usize, perm: Option<&[usize]>) -> Result<usize> {
    space.check_site(site)?;
    let Some(p) = perm else {
        return Ok(site - 1);
    };
    let n = space.n();
    let mut seen = vec![false; n];
    if p.len() != n || p.iter().any(|&s| s < 1 || s > n || std::mem::replace(&mut seen[s - 1], true)) {
        return Err(Error::Parameter(format!("{p:?} is not a permutation of 1..={n}")));
    }
    Ok(p.iter().position(|&s| s == site).unwrap())
}

/// `a†_site` in the Jordan-Wigner encoding where qubit `q` carries site
/// `perm[q − 1]` (identity when `perm` is `None`): a `Z` string on the
/// qubits before the site's qubit, then a raising operator.
pub fn creation(space: &FockSpace, site: usize, perm: Option<&[usize]>) -> Result<FockOperator> {
    let q = qubit_of(space, site, perm)?;
    let dim = space.dim();
    let mut m = CMatrix::zeros(dim, dim);
    let bit = 1usize << q;
    for b in 0..dim {
        if b & bit == 0 {
            m[(b | bit, b)] = c(string_sign(b, bit - 1), 0.0);
        }
    }
    Ok(FockOperator { space: *space, matrix: m })
}

pub fn annihilation(space: &FockSpace, site: usize, perm: Option<&[usize]>) -> Result<FockOperator> {
    Ok(creation(space, site, perm)?.adjoint())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smear {
    Create,
    Annihilate,
}

/// `a†(f) = Σ f_i a†_i` or `a(f) = Σ f*_i a_i`.
pub fn smeared(space: &FockSpace, f: &[Complex64], kind: Smear) -> Result<FockOperator> {
    if f.len() != space.n() {
        return Err(Error::dims(space.n(), f.len()));
    }
    let mut m = CMatrix::zeros(space.dim(), space.dim());
    for (k, &fk) in f.iter().enumerate() {
        m += creation(space, k + 1, None)?.matrix * fk;
    }
    let op = FockOperator { space: *space, matrix: m };
    Ok(match kind {
        Smear::Create => op,
        Smear::Annihilate => op.adjoint(),
    })
}

/// `Σ_ij o_ij a†_i a_j`.
pub fn lift_one_body(space: &FockSpace, o: &CMatrix) -> Result<FockOperator> {
    let n = space.n();
    if o.shape() != (n, n) {
        return Err(Error::dims(format!("{n}x{n}"), format!("{}x{}", o.nrows(), o.ncols())));
    }
    let dim = space.dim();
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        for j in 0..n {
            let bj = 1usize << j;
            if b & bj == 0 {
                continue;
            }
            let mid = b & !bj;
            let s1 = string_sign(b, bj - 1);
            for i in 0..n {
                let bi = 1usize << i;
                if mid & bi != 0 || o[(i, j)] == ZERO {
                    continue;
                }
                let s2 = string_sign(mid, bi - 1);
                m[(mid | bi, b)] += o[(i, j)] * (s1 * s2);
            }
        }
    }
    Ok(FockOperator { space: *space, matrix: m })
}

/// `n̂_S = Σ_{i ∈ S} a†_i a_i`.
pub fn number_operator(space: &FockSpace, sites: &SubsystemMask) -> Result<FockOperator> {
    if sites.n() != space.n() {
        return Err(Error::dims(space.n(), sites.n()));
    }
    let dim = space.dim();
    let m = CMatrix::from_fn(dim, dim, |r, b| {
        if r == b {
            c((b as u64 & sites.bits()).count_ones() as f64, 0.0)
        } else {
            ZERO
        }
    });
    Ok(FockOperator { space: *space, matrix: m })
}

fn occupied(b: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|&k| b >> k & 1 == 1).collect()
}

/// Second-quantized lift of an `n × n` matrix `A` with `⟨b'|Â|b⟩ =
/// det A[occ(b'), occ(b)]` between equal particle numbers and zero otherwise.
/// It satisfies `Â|0⟩ = |0⟩` and `Â a†_i = Σ_j A_ji a†_j Â`.
pub fn lift_matrix(space: &FockSpace, a: &CMatrix) -> Result<FockOperator> {
    let n = space.n();
    if a.shape() != (n, n) {
        return Err(Error::dims(format!("{n}x{n}"), format!("{}x{}", a.nrows(), a.ncols())));
    }
    let dim = space.dim();
    let mut m = CMatrix::zeros(dim, dim);
    m[(0, 0)] = ONE;
    for count in 1..=n {
        let states = space.sector(count);
        let occ: Vec<Vec<usize>> = states.iter().map(|&b| occupied(b, n)).collect();
        for (r, rows) in occ.iter().enumerate() {
            for (s, cols) in occ.iter().enumerate() {
                let minor = DMatrix::from_fn(count, count, |i, j| a[(rows[i], cols[j])]);
                m[(states[r], states[s])] = minor.determinant();
            }
        }
    }
    Ok(FockOperator { space: *space, matrix: m })
}

/// The total metric `η` induced by a reduced metric `M`.
pub fn lift_metric(space: &FockSpace, metric: &ReducedMetric) -> Result<FockOperator> {
    let mut eta = lift_matrix(space, metric.matrix())?;
    eta.matrix = linalg::symmetrize(&eta.matrix);
    Ok(eta)
}

/// Parity `P` with `P a†_i P = a†_{n+1−i}`: the lift of the antidiagonal.
pub fn parity_operator(space: &FockSpace) -> FockOperator {
    lift_matrix(space, &linalg::antidiagonal(space.n())).expect("antidiagonal has matching size")
}

/// `P · conj(H) · P = H` within `tol` (relative to the largest entry), with
/// time reversal acting as complex conjugation in the occupation basis.
pub fn pt_check(space: &FockSpace, h: &FockOperator, tol: f64) -> bool {
    if space.check_matrix(&h.matrix).is_err() {
        return false;
    }
    let p = parity_operator(space).matrix;
    let lhs = &p * linalg::conj(&h.matrix) * &p;
    let scale = linalg::max_abs(&h.matrix).max(f64::MIN_POSITIVE);
    linalg::max_abs(&(lhs - &h.matrix)) <= tol * scale
}

/// One factor of a Bravyi-Kitaev monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalFactor {
    Identity,
    Number,
    Create,
    Annihilate,
}

impl LocalFactor {
    const ALL: [LocalFactor; 4] = [
        LocalFactor::Identity,
        LocalFactor::Number,
        LocalFactor::Create,
        LocalFactor::Annihilate,
    ];

    fn is_odd(self) -> bool {
        matches!(self, LocalFactor::Create | LocalFactor::Annihilate)
    }

    fn charge(self) -> i32 {
        match self {
            LocalFactor::Create => 1,
            LocalFactor::Annihilate => -1,
            _ => 0,
        }
    }
}

/// An ordered product `Π_{s ∈ S ascending} f_s` of local factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial {
    /// `(0-based site, factor)`, ascending sites, identities omitted.
    pub factors: Vec<(usize, LocalFactor)>,
}

impl Monomial {
    /// Particle-number change.
    pub fn charge(&self) -> i32 {
        self.factors.iter().map(|(_, f)| f.charge()).sum()
    }

    /// Image of `|b⟩` as `(b', sign)`, or `None` if the monomial kills it.
    pub fn apply(&self, mut b: usize) -> Option<(usize, f64)> {
        let mut sign = 1.0;
        for &(site, f) in self.factors.iter().rev() {
            let bit = 1usize << site;
            match f {
                LocalFactor::Identity => {}
                LocalFactor::Number => {
                    if b & bit == 0 {
                        return None;
                    }
                }
                LocalFactor::Create => {
                    if b & bit != 0 {
                        return None;
                    }
                    sign *= string_sign(b, bit - 1);
                    b |= bit;
                }
                LocalFactor::Annihilate => {
                    if b & bit == 0 {
                        return None;
                    }
                    sign *= string_sign(b, bit - 1);
                    b &= !bit;
                }
            }
        }
        Some((b, sign))
    }

    pub fn to_operator(&self, space: &FockSpace) -> FockOperator {
        let dim = space.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for b in 0..dim {
            if let Some((t, s)) = self.apply(b) {
                m[(t, b)] = c(s, 0.0);
            }
        }
        FockOperator { space: *space, matrix: m }
    }
}

/// Even-degree monomials with one factor from `{1, n̂_i, a†_i, a_i}` per site
/// of `S`, enumerated with the first site varying slowest and factors in that
/// order. `|S| = k` gives `4^k / 2` monomials.
pub fn bk_monomials(sites: &SubsystemMask) -> Vec<Monomial> {
    let idx = sites.indices();
    let k = idx.len();
    let mut out = Vec::with_capacity(1 << (2 * k - 1));
    for code in 0..(1usize << (2 * k)) {
        let mut factors = Vec::with_capacity(k);
        let mut odd = 0;
        for (pos, &site) in idx.iter().enumerate() {
            let f = LocalFactor::ALL[(code >> (2 * (k - 1 - pos))) & 3];
            if f.is_odd() {
                odd += 1;
            }
            if f != LocalFactor::Identity {
                factors.push((site, f));
            }
        }
        if odd % 2 == 0 {
            out.push(Monomial { factors });
        }
    }
    out
}

/// The monomials of [`bk_monomials`] as dense operators.
pub fn bk_local_basis(space: &FockSpace, sites: &SubsystemMask) -> Result<Vec<FockOperator>> {
    if sites.n() != space.n() {
        return Err(Error::dims(space.n(), sites.n()));
    }
    Ok(bk_monomials(sites).iter().map(|m| m.to_operator(space)).collect())
}

/// `⟨ψ|ηO|ψ⟩ / ⟨ψ|η|ψ⟩`.
pub fn expectation(psi: &CVector, eta: &FockOperator, o: &FockOperator) -> Result<Complex64> {
    let dim = eta.space.dim();
    if psi.len() != dim || o.space != eta.space {
        return Err(Error::dims(dim, psi.len()));
    }
    let eta_psi = &eta.matrix * psi;
    let norm = psi.dotc(&eta_psi);
    if norm.norm() <= 1e-14 * psi.norm_squared() * linalg::frobenius(&eta.matrix) {
        return Err(Error::Precondition("state has zero norm under the metric".into()));
    }
    let value = psi.dotc(&(&eta.matrix * (&o.matrix * psi)));
    Ok(value / norm)
}

/// `ρ_A = Tr_B |ψ⟩⟨ψ|η / ⟨ψ|η|ψ⟩` for `H = H_A ⊗ H_B`, basis index `a·dim_B + b`.
///
/// Then `Tr(ρ_A O_A) = ⟨O_A ⊗ 1_B⟩_η`.
pub fn local_state(psi: &CVector, eta: &CMatrix, dim_a: usize, dim_b: usize) -> Result<CMatrix> {
    let dim = dim_a * dim_b;
    if dim == 0 || psi.len() != dim || eta.shape() != (dim, dim) {
        return Err(Error::dims(
            format!("state and metric of dimension {dim}"),
            format!("state {}, metric {}x{}", psi.len(), eta.nrows(), eta.ncols()),
        ));
    }
    let phi = eta.adjoint() * psi;
    let norm = psi.dotc(&(eta * psi));
    if norm.norm() <= 1e-14 * psi.norm_squared() * linalg::frobenius(eta) {
        return Err(Error::Precondition("state has zero norm under the metric".into()));
    }
    let rho = CMatrix::from_fn(dim_a, dim_a, |a, ap| {
        (0..dim_b).map(|b| psi[a * dim_b + b] * phi[ap * dim_b + b].conj()).sum::<Complex64>()
    });
    Ok(rho / norm)
}
