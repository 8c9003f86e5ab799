//! Brute-force locality oracle.
//!
//! Solves `ηO = O†η` over the real span of the Bravyi-Kitaev monomials of a
//! subsystem `S` and counts solutions. Writing `V_S` for the solution space,
//! `V_S ⊆ V_T` whenever `S ⊆ T`, identity multiples are always present, and
//! `S` carries an extensively local observable iff `dim V_S > dim V_{S−i}`
//! for every `i ∈ S` (a real vector space is never a finite union of proper
//! subspaces).
//!
//! When `η` conserves particle number the system splits by the charge
//! `Δ = #a† − #a` of the monomials. The `Δ = 0` part is a real system; the
//! pair `(Δ, −Δ)` for `Δ > 0` gives `η O_Δ = O_{−Δ}† η`, complex-linear in
//! `(c_Δ, conj c_{−Δ})`, so each complex solution counts twice. For `S = [n]`
//! every even matrix unit is available and the system splits further into
//! pairs of particle-number sectors.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{bk_monomials, FockOperator, FockSpace, Monomial, ORACLE_CAP};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::locality::SubsystemMask;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceOptions {
    pub cap_n: usize,
    /// Singular values below `rank_tol · σ_max` count as zero.
    pub rank_tol: f64,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            cap_n: ORACLE_CAP,
            rank_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceResult {
    /// `dim_R V_S`, identity included.
    pub solution_dim: usize,
    /// Nontrivial solutions: `solution_dim − 1`.
    pub dim_local: usize,
    pub extensive: bool,
    /// Smallest ratio between a retained and a discarded singular value over
    /// every rank decision made; `∞` when nothing was discarded.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub mask: SubsystemMask,
    pub dim_local: usize,
    pub local: bool,
    pub extensive: bool,
    pub gap: f64,
}

struct Solver {
    eta: CMatrix,
    n: usize,
    conserving: bool,
    tol: f64,
}

type Action = Vec<Option<(usize, f64)>>;

fn action(m: &Monomial, dim: usize) -> Action {
    (0..dim).map(|b| m.apply(b)).collect()
}

/// Rank and gap of a singular-value list (any order).
fn rank_gap(sigma: &[f64], tol: f64) -> (usize, f64) {
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return (0, f64::INFINITY);
    }
    let cut = tol * smax;
    let kept_min = sigma.iter().copied().filter(|&s| s > cut).fold(f64::INFINITY, f64::min);
    let dropped_max = sigma.iter().copied().filter(|&s| s <= cut).fold(0.0, f64::max);
    let rank = sigma.iter().filter(|&&s| s > cut).count();
    let gap = if dropped_max == 0.0 { f64::INFINITY } else { kept_min / dropped_max };
    (rank, gap)
}

fn real_rank(m: &DMatrix<f64>, tol: f64) -> (usize, f64) {
    rank_gap(&linalg::real_singular_values(m), tol)
}

fn complex_rank(m: &CMatrix, tol: f64) -> (usize, f64) {
    rank_gap(&linalg::singular_values(m), tol)
}

impl Solver {
    fn new(eta: &FockOperator) -> Self {
        let scale = linalg::max_abs(&eta.matrix);
        let eta_n = if scale > 0.0 { &eta.matrix / Complex64::new(scale, 0.0) } else { eta.matrix.clone() };
        Self {
            conserving: eta.conserves_number(1e-13),
            eta: eta_n,
            n: eta.space.n(),
            tol: 0.0,
        }
    }

    fn dim(&self) -> usize {
        1 << self.n
    }

    /// `(ηE)(r, b)` for a monomial `E` with the given action.
    fn eta_e(&self, act: &Action, r: usize, b: usize) -> Complex64 {
        match act[b] {
            Some((t, s)) => self.eta[(r, t)] * s,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// `(E†η)(r, b)`.
    fn e_dag_eta(&self, act: &Action, r: usize, b: usize) -> Complex64 {
        match act[r] {
            Some((t, s)) => self.eta[(t, b)] * s,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Real system over `c_k = x_k + i y_k` on the given residual entries.
    fn real_block(&self, acts: &[Action], entries: &[(usize, usize)]) -> (usize, f64) {
        let cols = 2 * acts.len();
        if cols == 0 {
            return (0, f64::INFINITY);
        }
        let mut m = DMatrix::<f64>::zeros(2 * entries.len(), cols);
        for (row, &(r, b)) in entries.iter().enumerate() {
            for (k, act) in acts.iter().enumerate() {
                let a = self.eta_e(act, r, b);
                let e = self.e_dag_eta(act, r, b);
                m[(2 * row, 2 * k)] = a.re - e.re;
                m[(2 * row, 2 * k + 1)] = -a.im - e.im;
                m[(2 * row + 1, 2 * k)] = a.im - e.im;
                m[(2 * row + 1, 2 * k + 1)] = a.re + e.re;
            }
        }
        let (rank, gap) = real_rank(&m, self.tol);
        (cols - rank, gap)
    }

    fn upper_entries(&self, same_sector: bool) -> Vec<(usize, usize)> {
        let dim = self.dim();
        let mut out = Vec::new();
        for r in 0..dim {
            for b in r..dim {
                if !same_sector || r.count_ones() == b.count_ones() {
                    out.push((r, b));
                }
            }
        }
        out
    }

    /// `dim_R V_S` via monomials.
    fn monomial_dim(&self, bits: u64) -> (usize, f64) {
        let mask = SubsystemMask::from_bits(self.n, bits).expect("nonempty mask");
        let monos = bk_monomials(&mask);
        let dim = self.dim();
        if !self.conserving {
            let acts: Vec<Action> = monos.iter().map(|m| action(m, dim)).collect();
            return self.real_block(&acts, &self.upper_entries(false));
        }
        let zero: Vec<Action> = monos.iter().filter(|m| m.charge() == 0).map(|m| action(m, dim)).collect();
        let (mut total, mut gap) = self.real_block(&zero, &self.upper_entries(true));
        let max_charge = monos.iter().map(|m| m.charge()).max().unwrap_or(0);
        for delta in (2..=max_charge).step_by(2) {
            let up: Vec<Action> = monos.iter().filter(|m| m.charge() == delta).map(|m| action(m, dim)).collect();
            let down: Vec<Action> = monos.iter().filter(|m| m.charge() == -delta).map(|m| action(m, dim)).collect();
            let entries: Vec<(usize, usize)> = (0..dim)
                .flat_map(|r| (0..dim).map(move |b| (r, b)))
                .filter(|&(r, b)| r.count_ones() as i32 == b.count_ones() as i32 + delta)
                .collect();
            let cols = up.len() + down.len();
            let mut m = CMatrix::zeros(entries.len(), cols);
            for (row, &(r, b)) in entries.iter().enumerate() {
                for (k, act) in up.iter().enumerate() {
                    m[(row, k)] = self.eta_e(act, r, b);
                }
                for (l, act) in down.iter().enumerate() {
                    m[(row, up.len() + l)] = -self.e_dag_eta(act, r, b);
                }
            }
            let (rank, g) = complex_rank(&m, self.tol);
            total += 2 * (cols - rank);
            gap = gap.min(g);
        }
        (total, gap)
    }

    /// `dim_R V_{[n]}` for number-conserving `η`, one sector pair at a time.
    fn full_dim_by_sectors(&self) -> (usize, f64) {
        let n = self.n;
        let sectors: Vec<Vec<usize>> = (0..=n).map(|k| (0..self.dim()).filter(|b| b.count_ones() as usize == k).collect()).collect();
        let block = |p: usize, q: usize| {
            CMatrix::from_fn(sectors[p].len(), sectors[q].len(), |i, j| self.eta[(sectors[p][i], sectors[q][j])])
        };
        let mut total = 0;
        let mut gap = f64::INFINITY;
        for p in 0..=n {
            // η_p X − X† η_p = 0 over complex d×d X; the residual is
            // anti-Hermitian, so its upper triangle carries every equation.
            let e = block(p, p);
            let d = e.nrows();
            let mut m = DMatrix::<f64>::zeros(d * (d + 1), 2 * d * d);
            let mut row = 0;
            for r in 0..d {
                for b in r..d {
                    // (ηX)_{rb} = Σ_k η_{rk} X_{kb};  (X†η)_{rb} = Σ_k conj(X_{kr}) η_{kb}.
                    for k in 0..d {
                        let a = e[(r, k)];
                        let col = 2 * (k * d + b);
                        m[(row, col)] += a.re;
                        m[(row, col + 1)] -= a.im;
                        m[(row + 1, col)] += a.im;
                        m[(row + 1, col + 1)] += a.re;
                        let h = e[(k, b)];
                        let col = 2 * (k * d + r);
                        m[(row, col)] -= h.re;
                        m[(row, col + 1)] -= h.im;
                        m[(row + 1, col)] -= h.im;
                        m[(row + 1, col + 1)] += h.re;
                    }
                    row += 2;
                }
            }
            let (rank, g) = real_rank(&m, self.tol);
            total += 2 * d * d - rank;
            gap = gap.min(g);
            for q in (p + 2..=n).step_by(2) {
                // η_p X − Z η_q = 0 with X, Z ∈ C^{d_p × d_q} and Z = O_{qp}†.
                let (ep, eq) = (block(p, p), block(q, q));
                let (dp, dq) = (ep.nrows(), eq.nrows());
                let mut m = CMatrix::zeros(dp * dq, 2 * dp * dq);
                for i in 0..dp {
                    for j in 0..dq {
                        let row = i * dq + j;
                        for k in 0..dp {
                            m[(row, k * dq + j)] += ep[(i, k)];
                        }
                        for k in 0..dq {
                            m[(row, dp * dq + i * dq + k)] -= eq[(k, j)];
                        }
                    }
                }
                let (rank, g) = complex_rank(&m, self.tol);
                total += 2 * (2 * dp * dq - rank);
                gap = gap.min(g);
            }
        }
        (total, gap)
    }

    fn solution_dim(&self, bits: u64) -> (usize, f64) {
        if bits == 0 {
            return (1, f64::INFINITY);
        }
        let full = (1u64 << self.n) - 1;
        if bits == full && self.conserving {
            self.full_dim_by_sectors()
        } else {
            self.monomial_dim(bits)
        }
    }
}

fn prepare(space: &FockSpace, eta: &FockOperator, opts: &BruteForceOptions) -> Result<Solver> {
    if space.n() > opts.cap_n {
        return Err(Error::CapExceeded {
            n: space.n(),
            cap: opts.cap_n,
        });
    }
    if eta.space != *space {
        return Err(Error::dims(space.dim(), eta.space.dim()));
    }
    if !(opts.rank_tol > 0.0) {
        return Err(Error::Parameter("rank tolerance must be positive".into()));
    }
    let dev = linalg::hermiticity_deviation(&eta.matrix);
    if dev > 1e-10 {
        return Err(Error::NotHermitian(dev));
    }
    let mut solver = Solver::new(eta);
    solver.tol = opts.rank_tol;
    Ok(solver)
}

/// Count the quasi-Hermitian operators Bravyi-Kitaev local to `S` and decide
/// whether one of them is local to no proper subset of `S`.
pub fn brute_force_locality(
    space: &FockSpace,
    eta: &FockOperator,
    s: &SubsystemMask,
    opts: &BruteForceOptions,
) -> Result<BruteForceResult> {
    if s.n() != space.n() {
        return Err(Error::dims(space.n(), s.n()));
    }
    let solver = prepare(space, eta, opts)?;
    let (dim, mut gap) = solver.solution_dim(s.bits());
    let mut extensive = true;
    for i in s.indices() {
        let (sub, g) = solver.solution_dim(s.bits() & !(1u64 << i));
        gap = gap.min(g);
        if sub >= dim {
            extensive = false;
        }
    }
    Ok(BruteForceResult {
        solution_dim: dim,
        dim_local: dim.saturating_sub(1),
        extensive,
        gap,
    })
}

/// [`brute_force_locality`] for every nonempty subsystem, sorted by mask.
/// Each `dim V_S` is computed once.
pub fn brute_force_scan(space: &FockSpace, eta: &FockOperator, opts: &BruteForceOptions) -> Result<Vec<OracleRow>> {
    let solver = prepare(space, eta, opts)?;
    let n = space.n();
    let dims: Vec<(usize, f64)> = (0..(1u64 << n)).into_par_iter().map(|bits| solver.solution_dim(bits)).collect();
    let rows = (1..(1u64 << n))
        .map(|bits| {
            let (dim, mut gap) = dims[bits as usize];
            let mut extensive = true;
            for i in 0..n {
                if bits >> i & 1 == 1 {
                    let (sub, g) = dims[(bits & !(1u64 << i)) as usize];
                    gap = gap.min(g);
                    extensive &= sub < dim;
                }
            }
            OracleRow {
                mask: SubsystemMask::from_bits(n, bits).expect("nonempty"),
                dim_local: dim - 1,
                local: dim > 1,
                extensive,
                gap,
            }
        })
        .collect();
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::lift_metric;
    use crate::linalg::c;
    use crate::locality::{kernel_dim, DEFAULT_RANK_TOL};
    use crate::models::{farthest_metric, nearest_metric, ChainParams, ReducedMetric};

    fn eta_of(metric: &ReducedMetric) -> (FockSpace, FockOperator) {
        let space = FockSpace::new(metric.n()).unwrap();
        let eta = lift_metric(&space, metric).unwrap();
        (space, eta)
    }

    #[test]
    fn identity_metric_admits_every_hermitian_combination() {
        let (space, eta) = eta_of(&ReducedMetric::identity(3));
        for s in SubsystemMask::all(3) {
            let r = brute_force_locality(&space, &eta, &s, &BruteForceOptions::default()).unwrap();
            assert_eq!(r.solution_dim, (1 << (2 * s.len())) / 2);
            assert!(r.extensive);
        }
    }

    #[test]
    fn solution_count_is_half_the_even_algebra_of_the_kernel() {
        let metric = farthest_metric(4, c(0.0, 0.5)).unwrap();
        let (space, eta) = eta_of(&metric);
        let rows = brute_force_scan(&space, &eta, &BruteForceOptions::default()).unwrap();
        for row in rows {
            let k = kernel_dim(metric.matrix(), row.mask.bits(), DEFAULT_RANK_TOL);
            let expect = if k == 0 { 1 } else { (1usize << (2 * k)) / 2 };
            assert_eq!(row.dim_local + 1, expect, "{}", row.mask);
            assert!(row.gap > 1e3);
        }
    }

    #[test]
    fn interior_single_site_has_nothing() {
        let metric = farthest_metric(5, c(0.0, 2.0)).unwrap();
        let (space, eta) = eta_of(&metric);
        let s = SubsystemMask::new(5, &[3]).unwrap();
        let r = brute_force_locality(&space, &eta, &s, &BruteForceOptions::default()).unwrap();
        assert_eq!(r.dim_local, 0);
        assert!(!r.extensive);
    }

    #[test]
    fn sector_path_matches_monomial_path() {
        let mut p = ChainParams::uniform(4, 2, c(0.0, 0.6), c(1.0, 0.0));
        p.beta = 0.3;
        for metric in [farthest_metric(3, c(0.3, 0.4)).unwrap(), nearest_metric(&p).unwrap(), farthest_metric(4, c(0.0, 2.0)).unwrap()] {
            let (_, eta) = eta_of(&metric);
            let mut solver = Solver::new(&eta);
            solver.tol = 1e-9;
            let full = (1u64 << metric.n()) - 1;
            assert_eq!(solver.full_dim_by_sectors().0, solver.monomial_dim(full).0);
        }
    }

    #[test]
    fn charge_split_matches_undivided_system() {
        let metric = farthest_metric(3, c(0.0, 0.5)).unwrap();
        let (_, eta) = eta_of(&metric);
        let mut split = Solver::new(&eta);
        split.tol = 1e-9;
        let mut whole = Solver::new(&eta);
        whole.tol = 1e-9;
        whole.conserving = false;
        for bits in 1..8u64 {
            assert_eq!(split.monomial_dim(bits).0, whole.monomial_dim(bits).0);
        }
    }

    #[test]
    fn cap_and_validation() {
        let (space, eta) = eta_of(&ReducedMetric::identity(3));
        let s = SubsystemMask::new(3, &[1]).unwrap();
        let tight = BruteForceOptions {
            cap_n: 2,
            ..BruteForceOptions::default()
        };
        assert!(matches!(brute_force_locality(&space, &eta, &s, &tight), Err(Error::CapExceeded { .. })));
        let mut bad = eta.clone();
        bad.matrix[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(
            brute_force_locality(&space, &bad, &s, &BruteForceOptions::default()),
            Err(Error::NotHermitian(_))
        ));
    }
}
