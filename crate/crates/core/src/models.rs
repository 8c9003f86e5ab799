//! PT-symmetric tight-binding chains and their reduced metrics.
//!
//! Sites are labelled `1..=n` in every public signature; matrices are indexed
//! from zero. The chain Hamiltonian is
//!
//! ```text
//! Γ_ii     = V_i + γ [i = m] + γ* [i = m̄]      m̄ = n - m + 1
//! Γ_i,i+1  = t*_{n-i}
//! Γ_i+1,i  = t_i
//! ```
//!
//! with parity-symmetric hopping phases (`arg t_{n-i} = arg t_i`) and on-site
//! potentials (`V_i = V_{n+1-i}`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, ONE, ZERO};
use crate::spectral;

/// Relative tolerance for the parity-symmetry checks on parameters.
const SYMMETRY_TOL: f64 = 1e-12;

/// Parameter bundle for the PT-symmetric chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n: usize,
    /// Impurity site carrying `γ`; its partner `n - m + 1` carries `γ*`.
    pub m: usize,
    pub gamma: Complex64,
    /// `t_1 .. t_{n-1}`.
    pub hoppings: Vec<Complex64>,
    /// `V_1 .. V_n`.
    pub onsite: Vec<f64>,
    /// Free parameter of the nearest-impurity metric family.
    #[serde(default)]
    pub beta: f64,
}

impl ChainParams {
    /// Uniform chain: all hoppings `t`, zero on-site potential.
    pub fn uniform(n: usize, m: usize, gamma: Complex64, t: Complex64) -> Self {
        Self {
            n,
            m,
            gamma,
            hoppings: vec![t; n.saturating_sub(1)],
            onsite: vec![0.0; n],
            beta: 0.0,
        }
    }

    /// The farthest-impurity XX chain (`m = 1`, `t = 1`, `V = 0`).
    pub fn xx(n: usize, gamma: Complex64) -> Self {
        Self::uniform(n, 1, gamma, ONE)
    }

    /// `m̄ = n - m + 1`.
    pub fn partner(&self) -> usize {
        self.n + 1 - self.m
    }

    /// Hopping amplitude `t_i`, 1-based.
    pub fn t(&self, i: usize) -> Complex64 {
        self.hoppings[i - 1]
    }

    /// Structural checks only: sizes, index ranges, nonzero finite hoppings.
    pub fn validate_structure(&self) -> Result<()> {
        let n = self.n;
        if n < 2 {
            return Err(Error::Parameter(format!("n = {n} must be at least 2")));
        }
        if self.m < 1 || self.m > n.div_ceil(2) {
            return Err(Error::Parameter(format!(
                "impurity site m = {} outside 1..={}",
                self.m,
                n.div_ceil(2)
            )));
        }
        if self.hoppings.len() != n - 1 {
            return Err(Error::Parameter(format!(
                "expected {} hoppings, found {}",
                n - 1,
                self.hoppings.len()
            )));
        }
        if self.onsite.len() != n {
            return Err(Error::Parameter(format!(
                "expected {n} on-site potentials, found {}",
                self.onsite.len()
            )));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !finite(&self.gamma) || !self.beta.is_finite() {
            return Err(Error::Parameter("non-finite gamma or beta".into()));
        }
        if self.onsite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("non-finite on-site potential".into()));
        }
        for (k, t) in self.hoppings.iter().enumerate() {
            if !finite(t) || t.norm() == 0.0 {
                return Err(Error::Parameter(format!("hopping t_{} must be nonzero and finite", k + 1)));
            }
        }
        Ok(())
    }

    /// `arg t_{n-i} = arg t_i` for every `i`.
    pub fn phases_symmetric(&self) -> bool {
        (1..self.n).all(|i| {
            let a = self.t(i);
            let b = self.t(self.n - i);
            let z = b * a.conj();
            z.re > 0.0 && z.im.abs() <= SYMMETRY_TOL * z.norm()
        })
    }

    /// `V_i = V_{n+1-i}` for every `i`.
    pub fn onsite_symmetric(&self) -> bool {
        let scale = self.onsite.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        (0..self.n).all(|i| (self.onsite[i] - self.onsite[self.n - 1 - i]).abs() <= SYMMETRY_TOL * scale)
    }

    /// Full validation: structure plus both parity symmetries.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if !self.phases_symmetric() {
            return Err(Error::Parameter("hopping phases are not parity symmetric".into()));
        }
        if !self.onsite_symmetric() {
            return Err(Error::Parameter("on-site potentials are not parity symmetric".into()));
        }
        Ok(())
    }

    /// Gauge phases `e^{iχ_i}` with `χ_1 = 0`, `χ_{i+1} = Σ_{j≤i} arg t_j`.
    ///
    /// With `D = diag(e^{iχ})`, `D† Γ D` is the Hamiltonian of
    /// [`strip_phases`] and `D† M D` maps a metric of `Γ` to one of it.
    pub fn gauge_phases(&self) -> Vec<Complex64> {
        let mut chi = 0.0;
        let mut out = Vec::with_capacity(self.n);
        out.push(ONE);
        for t in &self.hoppings {
            chi += t.arg();
            out.push(Complex64::from_polar(1.0, chi));
        }
        out
    }
}

/// The `n × n` single-particle matrix `Γ` of `H = Σ Γ_ij a†_i a_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstQuantizedHamiltonian {
    pub matrix: CMatrix,
}

impl FirstQuantizedHamiltonian {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Γ_ij ≠ 0 ⇒ |i - j| ≤ 1`.
    pub fn is_tridiagonal(&self) -> bool {
        let n = self.n();
        (0..n).all(|i| (0..n).all(|j| i.abs_diff(j) <= 1 || self.matrix[(i, j)] == ZERO))
    }

    /// `J Γ* J = Γ` within `tol` (relative, entrywise).
    pub fn is_pt_symmetric(&self, tol: f64) -> bool {
        let n = self.n();
        let scale = linalg::max_abs(&self.matrix).max(1.0);
        (0..n).all(|i| {
            (0..n).all(|j| (self.matrix[(n - 1 - i, n - 1 - j)].conj() - self.matrix[(i, j)]).norm() <= tol * scale)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Farthest,
    Nearest,
    Diagonal,
    Custom,
}

/// Hermitian `n × n` metric on the single-particle space.
///
/// Positive definiteness is never assumed; query it with
/// [`spectral::positive_definiteness`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedMetric {
    matrix: CMatrix,
    pub kind: MetricKind,
}

impl ReducedMetric {
    /// Validates Hermiticity to `1e-10` (relative) and stores the symmetrized
    /// matrix so the result is exactly Hermitian.
    pub fn new(matrix: CMatrix, kind: MetricKind) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::dims("nonempty square matrix", format!("{}x{}", matrix.nrows(), matrix.ncols())));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Parameter("non-finite metric entry".into()));
        }
        let dev = linalg::hermiticity_deviation(&matrix);
        if dev > 1e-10 {
            return Err(Error::NotHermitian(dev));
        }
        Ok(Self {
            matrix: linalg::symmetrize(&matrix),
            kind,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: CMatrix::identity(n, n),
            kind: MetricKind::Diagonal,
        }
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let n = entries.len();
        Self::new(
            CMatrix::from_fn(n, n, |i, j| if i == j { c(entries[i], 0.0) } else { ZERO }),
            MetricKind::Diagonal,
        )
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Gauge transform `D† M D` for a diagonal unitary `D = diag(phases)`.
    pub fn gauge(&self, phases: &[Complex64]) -> Result<Self> {
        let n = self.n();
        if phases.len() != n {
            return Err(Error::dims(n, phases.len()));
        }
        let m = CMatrix::from_fn(n, n, |i, j| phases[i].conj() * self.matrix[(i, j)] * phases[j]);
        Self::new(m, self.kind)
    }
}

/// First-quantized `Γ` of the PT-symmetric chain.
pub fn build_pt_hamiltonian(params: &ChainParams) -> Result<FirstQuantizedHamiltonian> {
    params.validate()?;
    let n = params.n;
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = c(params.onsite[i], 0.0);
    }
    g[(params.m - 1, params.m - 1)] += params.gamma;
    g[(params.partner() - 1, params.partner() - 1)] += params.gamma.conj();
    for i in 1..n {
        g[(i - 1, i)] = params.t(n - i).conj();
        g[(i, i - 1)] = params.t(i);
    }
    Ok(FirstQuantizedHamiltonian { matrix: g })
}

/// The XX chain with impurities `γ, γ*` on the two end sites and unit hopping.
pub fn build_xx_hamiltonian(n: usize, gamma: Complex64) -> Result<FirstQuantizedHamiltonian> {
    if n < 2 {
        return Err(Error::Parameter(format!("n = {n} must be at least 2")));
    }
    build_pt_hamiltonian(&ChainParams::xx(n, gamma))
}

/// Analytic metric of the XX chain:
/// `M_ii = 1`, `M_ij = -i Im γ (γ*)^{j-i-1}` for `i < j`, Hermitian conjugate below.
///
/// Positive definite only on part of the unbroken region.
pub fn farthest_metric(n: usize, gamma: Complex64) -> Result<ReducedMetric> {
    if n < 2 {
        return Err(Error::Parameter(format!("n = {n} must be at least 2")));
    }
    if !gamma.re.is_finite() || !gamma.im.is_finite() {
        return Err(Error::Parameter("non-finite gamma".into()));
    }
    let mut m = CMatrix::identity(n, n);
    let prefactor = c(0.0, -gamma.im);
    for i in 0..n {
        for j in (i + 1)..n {
            let z = prefactor * gamma.conj().powu((j - i - 1) as u32);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    Ok(ReducedMetric {
        matrix: m,
        kind: MetricKind::Farthest,
    })
}

/// One-parameter metric family for adjacent impurities (`n = 2m`).
///
/// Nonzero only on the diagonal and antidiagonal. The central block is
///
/// ```text
/// [ 1                      (β - i Im γ) / t_m ]
/// [ (β + i Im γ) / t*_m    1                  ]
/// ```
///
/// and for `i < m`, with `ī = n + 1 - i`, the outer entries follow
///
/// ```text
/// M_ii = (t*_i / t*_{n-i}) M_{i+1,i+1}
/// M_iī = (t*_i / t_{n-i})  M_{i+1,n-i}
/// M_īī = (t_i  / t_{n-i})  M_{n-i,n-i}
/// ```
///
/// which is what `M Γ = Γ† M` forces for the Hamiltonian of
/// [`build_pt_hamiltonian`].
pub fn nearest_metric(params: &ChainParams) -> Result<ReducedMetric> {
    params.validate()?;
    let n = params.n;
    let m = params.m;
    if n != 2 * m {
        return Err(Error::ModelDomain(format!(
            "adjacent-impurity metric needs n = 2m, got n = {n}, m = {m}"
        )));
    }
    let tm = params.t(m);
    let bound = params.beta * params.beta + params.gamma.im * params.gamma.im / tm.norm_sqr();
    if bound >= 1.0 {
        return Err(Error::Parameter(format!(
            "beta^2 + (Im gamma)^2 / |t_m|^2 = {bound} must be < 1"
        )));
    }
    let mut mm = CMatrix::zeros(n, n);
    // 0-based: site k lives at index k - 1.
    mm[(m - 1, m - 1)] = ONE;
    mm[(m, m)] = ONE;
    let center = c(params.beta, -params.gamma.im) / tm;
    mm[(m - 1, m)] = center;
    mm[(m, m - 1)] = center.conj();
    for i in (1..m).rev() {
        let ib = n + 1 - i;
        let (ti, tni) = (params.t(i), params.t(n - i));
        mm[(i - 1, i - 1)] = ti.conj() / tni.conj() * mm[(i, i)];
        let off = ti.conj() / tni * mm[(i, n - i - 1)];
        mm[(i - 1, ib - 1)] = off;
        mm[(ib - 1, i - 1)] = off.conj();
        mm[(ib - 1, ib - 1)] = ti / tni * mm[(n - i - 1, n - i - 1)];
    }
    // Diagonal entries are real under symmetric phases; drop rounding residue.
    for k in 0..n {
        mm[(k, k)] = c(mm[(k, k)].re, 0.0);
    }
    Ok(ReducedMetric {
        matrix: mm,
        kind: MetricKind::Nearest,
    })
}

/// Replace every hopping by its modulus (the gauge `b_i = e^{-iχ_i} a_i`).
pub fn strip_phases(params: &ChainParams) -> Result<ChainParams> {
    params.validate_structure()?;
    if !params.phases_symmetric() {
        return Err(Error::Precondition("hopping phases are not parity symmetric".into()));
    }
    let mut out = params.clone();
    for t in &mut out.hoppings {
        *t = c(t.norm(), 0.0);
    }
    Ok(out)
}

/// Cluster threshold for degenerate eigenvalues, relative to `‖op‖_F`.
const DEGENERACY_TOL: f64 = 1e-8;

/// Metric `η` with `η^{-1} = U d U†` for an eigenvector matrix `U` of `op`.
///
/// `d` defaults to the identity. Eigenvectors inside a degenerate cluster are
/// orthonormalised within the cluster.
pub fn metric_from_spectrum(op: &CMatrix, d: Option<&[f64]>) -> Result<CMatrix> {
    let n = op.nrows();
    if !op.is_square() || n == 0 {
        return Err(Error::dims("nonempty square matrix", format!("{}x{}", n, op.ncols())));
    }
    let report = spectral::eigen_report(op, spectral::DEFAULT_TOL);
    if report.reality_class != spectral::RealityClass::Real {
        return Err(Error::NoMetric("spectrum is not real".into()));
    }
    if !report.diagonalizable {
        return Err(Error::NoMetric(format!(
            "operator is not diagonalizable (eigenvector condition {:.3e})",
            report.condition
        )));
    }
    let weights: Vec<f64> = match d {
        Some(w) => {
            if w.len() != n {
                return Err(Error::dims(n, w.len()));
            }
            if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                return Err(Error::Parameter("d must be positive".into()));
            }
            w.to_vec()
        }
        None => vec![1.0; n],
    };

    let (values, vectors) = linalg::eigen_general(op)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re));
    let gap = DEGENERACY_TOL * linalg::frobenius(op).max(f64::MIN_POSITIVE);
    let mut u = CMatrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (values[order[end]].re - values[order[end - 1]].re).abs() < gap {
            end += 1;
        }
        let mut cluster = CMatrix::from_fn(n, end - start, |i, j| vectors[(i, order[start + j])]);
        if end - start > 1 {
            linalg::orthonormalize_columns(&mut cluster);
        }
        u.columns_mut(start, end - start).copy_from(&cluster);
        start = end;
    }
    let mut ud = u.clone();
    for (j, &o) in order.iter().enumerate() {
        ud.column_mut(j).scale_mut(weights[o]);
    }
    let eta_inv = ud * u.adjoint();
    let eta = linalg::inverse(&eta_inv)?;
    Ok(linalg::symmetrize(&eta))
}
