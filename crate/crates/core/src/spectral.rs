//! Eigenstructure diagnostics, quasi-Hermiticity residuals and PT phase scans.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::models::{build_pt_hamiltonian, ChainParams};

/// Default relative tolerance for reality and pairing decisions.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Eigenvector condition numbers above this flag the operator as defective.
pub const CONDITION_THRESHOLD: f64 = 1e8;

/// Eigenvalues closer than this (relative to `max(1, ρ)`) are treated as one
/// cluster when counting geometric multiplicities. A size-`k` Jordan block
/// perturbed by rounding splits its eigenvalue by roughly `ε^{1/k}`, well
/// inside this radius for the block sizes that occur at desk scale.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Relative singular-value threshold for the rank of a cluster's eigenvectors.
const GEOMETRIC_RANK_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RealityClass {
    Real,
    ComplexConjugatePaired,
    Other,
}

/// Coarse label used by phase scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseClass {
    /// Real spectrum, diagonalizable.
    Unbroken,
    /// Defective (exceptional point).
    Exceptional,
    /// Every eigenvalue purely imaginary.
    PurelyImaginary,
    /// Conjugate pairs that are neither all real nor all imaginary.
    Broken,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    /// Sorted by `(Re, Im)` ascending.
    pub eigenvalues: Vec<Complex64>,
    pub reality_class: RealityClass,
    pub diagonalizable: bool,
    /// Condition number of the unit-column eigenvector matrix.
    pub condition: f64,
    /// Representative eigenvalue of a defective cluster and its
    /// geometric-multiplicity deficit.
    pub defect_witness: Option<(Complex64, usize)>,
    /// Number of eigenvalue clusters.
    pub distinct: usize,
    pub spectral_radius: f64,
    /// Largest `|Im λ|` over cluster-averaged eigenvalues.
    pub max_abs_im: f64,
    /// Largest `|Re λ|` over cluster-averaged eigenvalues.
    pub max_abs_re: f64,
    pub purely_imaginary: bool,
}

impl SpectrumReport {
    pub fn phase_class(&self) -> PhaseClass {
        if !self.diagonalizable {
            PhaseClass::Exceptional
        } else if self.reality_class == RealityClass::Real {
            PhaseClass::Unbroken
        } else if self.purely_imaginary {
            PhaseClass::PurelyImaginary
        } else if self.reality_class == RealityClass::ComplexConjugatePaired {
            PhaseClass::Broken
        } else {
            PhaseClass::Other
        }
    }

    /// All eigenvalues real within `tol · ρ`.
    pub fn is_real(&self) -> bool {
        self.reality_class == RealityClass::Real
    }
}

fn failed_report() -> SpectrumReport {
    SpectrumReport {
        eigenvalues: Vec::new(),
        reality_class: RealityClass::Other,
        diagonalizable: false,
        condition: f64::INFINITY,
        defect_witness: None,
        distinct: 0,
        spectral_radius: f64::NAN,
        max_abs_im: f64::NAN,
        max_abs_re: f64::NAN,
        purely_imaginary: false,
    }
}

/// Single-linkage clusters of eigenvalues within `radius`.
fn clusters(values: &[Complex64], radius: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

/// Full eigendecomposition with reality, pairing and defectiveness diagnostics.
///
/// Never fails: a matrix with non-finite entries or a non-converging Schur
/// iteration yields an empty, non-diagonalizable report of class `Other`.
pub fn eigen_report(op: &CMatrix, tol: f64) -> SpectrumReport {
    let n = op.nrows();
    let (values, vectors) = match linalg::eigen_general(op) {
        Ok(pair) => pair,
        Err(_) => return failed_report(),
    };
    if n == 0 {
        return SpectrumReport {
            eigenvalues: Vec::new(),
            reality_class: RealityClass::Real,
            diagonalizable: true,
            condition: 1.0,
            defect_witness: None,
            distinct: 0,
            spectral_radius: 0.0,
            max_abs_im: 0.0,
            max_abs_re: 0.0,
            purely_imaginary: true,
        };
    }
    let rho = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale = rho.max(1.0);

    let groups = clusters(&values, CLUSTER_TOL * scale);
    let mut defect_witness = None;
    // Rounding splits a defective eigenvalue into a small star around the
    // exact value; the cluster mean is accurate to working precision.
    let mut averaged = values.clone();
    for g in &groups {
        let mean = g.iter().map(|&k| values[k]).sum::<Complex64>() / g.len() as f64;
        for &k in g {
            averaged[k] = mean;
        }
        if g.len() < 2 || defect_witness.is_some() {
            continue;
        }
        let block = CMatrix::from_fn(n, g.len(), |i, j| vectors[(i, g[j])]);
        let s = linalg::singular_values(&block);
        let rank = linalg::numerical_rank(&s, GEOMETRIC_RANK_TOL);
        if rank < g.len() {
            defect_witness = Some((mean, g.len() - rank));
        }
    }

    let max_abs_im = averaged.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let max_abs_re = averaged.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    let conj: Vec<Complex64> = averaged.iter().map(|z| z.conj()).collect();
    let reality_class = if max_abs_im <= tol * rho {
        RealityClass::Real
    } else if linalg::spectrum_distance(&averaged, &conj).unwrap_or(f64::INFINITY) <= tol * scale {
        RealityClass::ComplexConjugatePaired
    } else {
        RealityClass::Other
    };

    let sigma = linalg::singular_values(&vectors);
    let condition = match (sigma.first(), sigma.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    };
    let diagonalizable = condition <= CONDITION_THRESHOLD && defect_witness.is_none();

    let mut eigenvalues = values;
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    SpectrumReport {
        eigenvalues,
        reality_class,
        diagonalizable,
        condition,
        defect_witness,
        distinct: groups.len(),
        spectral_radius: rho,
        max_abs_im,
        max_abs_re,
        purely_imaginary: max_abs_re <= DEFAULT_TOL * scale,
    }
}

/// `‖M·op − op†·M‖_F / (‖M‖_F·‖op‖_F)`.
pub fn quasi_hermiticity_residual(metric: &CMatrix, op: &CMatrix) -> Result<f64> {
    let n = metric.nrows();
    if !metric.is_square() || op.shape() != (n, n) {
        return Err(Error::dims(
            format!("{n}x{n}"),
            format!("metric {:?}, operator {:?}", metric.shape(), op.shape()),
        ));
    }
    let r = metric * op - op.adjoint() * metric;
    let denom = linalg::frobenius(metric) * linalg::frobenius(op);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(linalg::frobenius(&r) / denom)
}

/// `(min λ > tol · max λ, min λ)` for a Hermitian matrix.
pub fn positive_definiteness(metric: &CMatrix, tol: f64) -> Result<(bool, f64)> {
    if !metric.is_square() {
        return Err(Error::dims("square matrix", format!("{:?}", metric.shape())));
    }
    let dev = linalg::hermiticity_deviation(metric);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let values = linalg::hermitian_eigenvalues(metric);
    let (Some(&min), Some(&max)) = (values.first(), values.last()) else {
        return Err(Error::dims("nonempty matrix", "0x0"));
    };
    Ok((min > tol * max && min > 0.0, min))
}

/// `h = Ω op Ω^{-1}` with `Ω = M^{1/2}`; Hermitian whenever `M` is a
/// positive-definite metric for `op`.
pub fn similarity_hermitize(metric: &CMatrix, op: &CMatrix, tol: f64) -> Result<CMatrix> {
    let (pd, min) = positive_definiteness(metric, 0.0)?;
    if !pd {
        return Err(Error::Precondition(format!("metric is not positive definite (min eigenvalue {min:.3e})")));
    }
    let residual = quasi_hermiticity_residual(metric, op)?;
    if residual > tol {
        return Err(Error::Precondition(format!("quasi-Hermiticity residual {residual:.3e} exceeds {tol:.3e}")));
    }
    let (omega, omega_inv) = linalg::hermitian_sqrt(metric)?;
    Ok(omega * op * omega_inv)
}

/// Classify every grid point. Output order follows the input order.
pub fn pt_phase_scan(grid: &[ChainParams]) -> Result<Vec<(ChainParams, SpectrumReport)>> {
    grid.par_iter()
        .map(|p| {
            let g = build_pt_hamiltonian(p)?;
            Ok((p.clone(), eigen_report(&g.matrix, DEFAULT_TOL)))
        })
        .collect()
}

/// `J M* J = M` entrywise within `tol` (relative to the largest entry).
pub fn check_pt_metric(metric: &CMatrix, tol: f64) -> bool {
    let n = metric.nrows();
    if !metric.is_square() {
        return false;
    }
    let scale = linalg::max_abs(metric).max(f64::MIN_POSITIVE);
    (0..n).all(|i| {
        (0..n).all(|j| (metric[(n - 1 - i, n - 1 - j)].conj() - metric[(i, j)]).norm() <= tol * scale)
    })
}
