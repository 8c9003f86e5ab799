//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quasilocal::fock::{brute_force_scan, lift_metric, lift_one_body, BruteForceOptions, FockSpace};
use quasilocal::linalg::{self, c, CMatrix, ONE};
use quasilocal::locality::{kernel_dim, scan_subsystems, Predicate, ScanOptions, DEFAULT_RANK_TOL};
use quasilocal::models::{build_pt_hamiltonian, farthest_metric, nearest_metric, ChainParams, MetricKind, ReducedMetric};
use quasilocal::schmidt::{
    build_eta_max, build_eta_min, operator_schmidt, simultaneous_reduction, solve_block_metrics, solve_local_b,
    Bipartition, SCHMIDT_TOL,
};
use quasilocal::spectral::{eigen_report, pt_phase_scan, similarity_hermitize, DEFAULT_TOL};
use quasilocal::{Complex64, SubsystemMask};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn polar(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

fn farthest_gammas() -> [Complex64; 4] {
    [c(0.0, 0.5), c(0.0, 2.0), polar(PI / 3.0), c(0.3, 0.4)]
}

/// Metric and Hamiltonian pairs used by several criteria.
fn model_samples(max_n: usize) -> Vec<(String, ReducedMetric, CMatrix)> {
    let mut out = Vec::new();
    for n in 2..=max_n {
        for g in farthest_gammas().into_iter().chain([c(0.0, 0.1), c(0.2, 0.15)]) {
            let p = ChainParams::xx(n, g);
            out.push((
                format!("farthest n={n} γ={g}"),
                farthest_metric(n, g).unwrap(),
                build_pt_hamiltonian(&p).unwrap().matrix,
            ));
        }
        if n % 2 == 0 {
            for beta in [0.0, 0.3] {
                let mut p = ChainParams::uniform(n, n / 2, c(0.0, 0.5), ONE);
                p.beta = beta;
                out.push((
                    format!("nearest n={n} β={beta}"),
                    nearest_metric(&p).unwrap(),
                    build_pt_hamiltonian(&p).unwrap().matrix,
                ));
            }
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let mut metrics: Vec<(String, ReducedMetric)> = Vec::new();
    for n in 2..=6 {
        for g in farthest_gammas() {
            metrics.push((format!("farthest n={n} γ={g}"), farthest_metric(n, g).unwrap()));
        }
        if n % 2 == 0 {
            for beta in [0.0, 0.3] {
                let mut p = ChainParams::uniform(n, n / 2, c(0.0, 0.5), ONE);
                p.beta = beta;
                metrics.push((format!("nearest n={n} β={beta}"), nearest_metric(&p).unwrap()));
            }
        }
    }
    let (mut compared, mut disagree) = (0, Vec::new());
    let mut min_gap = f64::INFINITY;
    for (label, m) in &metrics {
        let space = FockSpace::new(m.n()).unwrap();
        let eta = lift_metric(&space, m).unwrap();
        let oracle = brute_force_scan(&space, &eta, &BruteForceOptions::default()).unwrap();
        let kernel = scan_subsystems(m, &ScanOptions::default()).unwrap();
        for (o, k) in oracle.iter().zip(&kernel.rows) {
            assert_eq!(o.mask, k.mask);
            compared += 1;
            min_gap = min_gap.min(o.gap);
            if (o.local, o.extensive) != (k.local, k.extensive) {
                disagree.push(format!("{label} {}", o.mask));
            }
        }
    }
    Outcome::new(
        disagree.is_empty(),
        format!(
            "{}/{compared} subsystems agree over {} metrics (min oracle rank gap {min_gap:.1e}){}",
            compared - disagree.len(),
            metrics.len(),
            if disagree.is_empty() { String::new() } else { format!("; first: {}", disagree[0]) }
        ),
    )
}

fn classification(predicate: Predicate, gammas: &[(String, Complex64)]) -> Outcome {
    let mut total = (0, 0);
    let mut failing = Vec::new();
    for (name, g) in gammas {
        for n in 4..=12 {
            let m = farthest_metric(n, *g).unwrap();
            let opts = ScanOptions {
                predicate: predicate.clone(),
                ..ScanOptions::default()
            };
            let (agree, compared) = scan_subsystems(&m, &opts).unwrap().agreement().unwrap();
            total.0 += agree;
            total.1 += compared;
            if agree != compared {
                failing.push(format!("{name} n={n}: {} mismatches", compared - agree));
            }
        }
    }
    let detail = if failing.is_empty() {
        format!("{}/{} subsets agree", total.0, total.1)
    } else {
        format!("{}/{} subsets agree; {}", total.0, total.1, failing.join(", "))
    };
    Outcome::new(failing.is_empty(), detail)
}

fn criterion_2() -> Outcome {
    let gammas: Vec<(String, Complex64)> =
        [("θ=π/6", PI / 6.0), ("θ=π/4", PI / 4.0), ("θ=π/2", PI / 2.0)].iter().map(|(s, t)| (s.to_string(), polar(*t))).collect();
    classification(Predicate::UnitDisk, &gammas)
}

fn criterion_3() -> Outcome {
    let gammas = vec![("γ=2i".to_string(), c(0.0, 2.0)), ("γ=0.3+0.4i".to_string(), c(0.3, 0.4))];
    classification(Predicate::Conds, &gammas)
}

fn random_symmetric_chain(rng: &mut ChaCha8Rng, n: usize, symmetric_moduli: bool) -> ChainParams {
    let mut p = ChainParams::uniform(n, n / 2, c(0.0, 0.0), ONE);
    for i in 1..=n / 2 {
        let phase = rng.random_range(-PI..PI);
        let r1 = rng.random_range(0.5..1.5);
        let r2 = if symmetric_moduli { r1 } else { rng.random_range(0.5..1.5) };
        p.hoppings[i - 1] = Complex64::from_polar(r1, phase);
        p.hoppings[n - i - 1] = Complex64::from_polar(r2, phase);
    }
    p
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut agree, mut compared, mut samples) = (0, 0, 0);
    for n in [4, 6, 8] {
        for k in 0..6 {
            let mut p = random_symmetric_chain(&mut rng, n, false);
            let tm = p.t(n / 2).norm();
            // Cover Imγ = 0, β = 0 and both nonzero, inside the admissible region.
            let (g, beta) = match k % 3 {
                0 => (rng.random_range(0.1..0.6) * tm, 0.0),
                1 => (0.0, rng.random_range(0.1..0.6)),
                _ => (rng.random_range(0.1..0.5) * tm, rng.random_range(0.1..0.5)),
            };
            p.gamma = c(rng.random_range(-1.0..1.0), g);
            p.beta = beta;
            let m = nearest_metric(&p).unwrap();
            let opts = ScanOptions {
                predicate: Predicate::Parity,
                ..ScanOptions::default()
            };
            let (a, t) = scan_subsystems(&m, &opts).unwrap().agreement().unwrap();
            agree += a;
            compared += t;
            samples += 1;
        }
        let mut p = random_symmetric_chain(&mut rng, n, true);
        p.gamma = c(rng.random_range(-1.0..1.0), 0.0);
        let m = nearest_metric(&p).unwrap();
        let r = scan_subsystems(&m, &ScanOptions::default()).unwrap();
        compared += r.rows.len();
        agree += r.rows.iter().filter(|row| row.extensive).count();
        samples += 1;
    }
    Outcome::new(agree == compared, format!("{agree}/{compared} subsets as predicted over {samples} chains"))
}

fn criterion_5() -> Outcome {
    let grid: Vec<ChainParams> = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0]
        .iter()
        .map(|&g| ChainParams::uniform(4, 2, c(0.0, g), ONE))
        .collect();
    let scan = pt_phase_scan(&grid).unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for (p, r) in &scan {
        let g = p.gamma.im;
        let ok = if g < 1.0 {
            r.max_abs_im <= 1e-10
        } else if g == 1.0 {
            !r.diagonalizable && r.max_abs_im <= 1e-10 && r.distinct == 2
        } else {
            r.max_abs_re <= 1e-10
        };
        if !ok {
            pass = false;
            notes.push(format!("Imγ={g}: max|Re|={:.3e} max|Im|={:.3e}", r.max_abs_re, r.max_abs_im));
        }
    }
    let detail = if pass {
        "real below 1, defective with 2 distinct at 1, imaginary above".to_string()
    } else {
        notes.join("; ")
    };
    Outcome::new(pass, detail)
}

fn sign(x: f64, scale: f64) -> i8 {
    if x > 1e-9 * scale {
        1
    } else if x < -1e-9 * scale {
        -1
    } else {
        0
    }
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let samples = model_samples(6);
    for (label, m, gamma) in &samples {
        let space = FockSpace::new(m.n()).unwrap();
        let eta = lift_metric(&space, m).unwrap().matrix;
        let h = lift_one_body(&space, gamma).unwrap().matrix;
        let rel = linalg::frobenius(&(&eta * &h - h.adjoint() * &eta)) / (linalg::frobenius(&eta) * linalg::frobenius(&h));
        worst = worst.max(rel);
        let vacuum_exact = (0..space.dim()).all(|i| eta[(i, 0)] == if i == 0 { ONE } else { c(0.0, 0.0) });
        let me = linalg::hermitian_eigenvalues(m.matrix());
        let ee = linalg::hermitian_eigenvalues(&eta);
        let same_sign = sign(me[0], me[me.len() - 1].abs()) == sign(ee[0], ee[ee.len() - 1].abs());
        if rel > 1e-10 || !vacuum_exact || !same_sign {
            failures.push(label.clone());
        }
    }
    Outcome::new(
        failures.is_empty(),
        format!("{} samples, worst relative residual {worst:.2e}{}", samples.len(), if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }),
    )
}

fn hs_projection_norm(target: &CMatrix, basis: &[CMatrix]) -> f64 {
    basis.iter().map(|b| (b.adjoint() * target).trace().norm_sqr()).sum::<f64>().sqrt()
}

fn block_residual(factors: &[CMatrix], o: &CMatrix) -> f64 {
    factors
        .iter()
        .map(|f| linalg::frobenius(&(f * o - o.adjoint() * f)) / (linalg::frobenius(f) * linalg::frobenius(o)))
        .fold(0.0, f64::max)
}

fn random_pd(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = CMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    linalg::symmetrize(&(&a * a.adjoint() + CMatrix::identity(d, d) * c(0.1, 0.0)))
}

fn criterion_7() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut worst_residual: f64 = 0.0;

    let min = operator_schmidt(&build_eta_min(0.1).unwrap(), Bipartition::new(2, 2).unwrap(), SCHMIDT_TOL).unwrap();
    let (sa, sb) = (solve_block_metrics(min.significant_a()).unwrap(), solve_block_metrics(min.significant_b()).unwrap());
    if min.schmidt_number != 2 || !sa.is_empty() || !sb.is_empty() {
        pass = false;
        notes.push(format!(
            "η_min: schmidt_number {}, nontrivial solutions A {} B {}",
            min.schmidt_number,
            sa.len(),
            sb.len()
        ));
    }

    let max = operator_schmidt(&build_eta_max(1.0, 4, 4).unwrap(), Bipartition::new(4, 4).unwrap(), SCHMIDT_TOL).unwrap();
    let sols = solve_block_metrics(max.significant_b()).unwrap();
    let mut p = CMatrix::zeros(4, 4);
    p[(0, 0)] = ONE;
    let traceless = &p - CMatrix::identity(4, 4) * c(0.25, 0.0);
    let captured = hs_projection_norm(&traceless, &sols) / linalg::frobenius(&traceless);
    let r = block_residual(max.significant_b(), &p);
    worst_residual = worst_residual.max(r);
    for s in &sols {
        worst_residual = worst_residual.max(block_residual(max.significant_b(), s));
    }
    if max.schmidt_number != 10 || sols.is_empty() || (captured - 1.0).abs() > 1e-10 || r > 1e-10 {
        pass = false;
        notes.push(format!("η_max: schmidt_number {}, {} solutions, projector captured {captured:.3}", max.schmidt_number, sols.len()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (da, db) in [(2, 2), (2, 3), (3, 3), (3, 2)] {
        let eta = linalg::kron(&random_pd(&mut rng, da), &random_pd(&mut rng, db));
        let d = operator_schmidt(&eta, Bipartition::new(da, db).unwrap(), SCHMIDT_TOL).unwrap();
        let a = solve_block_metrics(d.significant_a()).unwrap();
        let b = solve_block_metrics(d.significant_b()).unwrap();
        for s in &a {
            worst_residual = worst_residual.max(block_residual(d.significant_a(), s));
        }
        for s in &b {
            worst_residual = worst_residual.max(block_residual(d.significant_b(), s));
        }
        if d.schmidt_number != 1 || a.len() != da * da - 1 || b.len() != db * db - 1 {
            pass = false;
            notes.push(format!("tensor {da}x{db}: schmidt_number {}, solutions {} / {}", d.schmidt_number, a.len(), b.len()));
        }
    }
    if worst_residual > 1e-10 {
        pass = false;
    }
    notes.push(format!("worst residual {worst_residual:.2e}"));
    Outcome::new(pass, notes.join("; "))
}

/// Three families: generic, product and hidden block structure on B.
fn block_structure_metric(rng: &mut ChaCha8Rng, d: usize, kind: usize) -> CMatrix {
    match kind {
        0 => random_pd(rng, d * d),
        1 => linalg::kron(&random_pd(rng, d), &random_pd(rng, d)),
        _ => {
            let s = CMatrix::from_fn(d, d, |i, j| {
                c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) + if i == j { c(2.0, 0.0) } else { c(0.0, 0.0) }
            });
            let s_inv = s.clone().try_inverse().unwrap();
            let mut eta = CMatrix::zeros(d * d, d * d);
            for _ in 0..3 {
                let mut blocks = CMatrix::zeros(d, d);
                blocks[(0, 0)] = c(rng.random_range(0.5..2.0), 0.0);
                let rest = random_pd(rng, d - 1);
                blocks.view_mut((1, 1), (d - 1, d - 1)).copy_from(&rest);
                let b = s_inv.adjoint() * blocks * &s_inv;
                eta += linalg::kron(&random_pd(rng, d), &linalg::symmetrize(&b));
            }
            eta
        }
    }
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut consistent, mut present, mut failures) = (0, 0, Vec::new());
    for k in 0..100 {
        let d = if k % 2 == 0 { 2 } else { 3 };
        let eta = block_structure_metric(&mut rng, d, k % 3);
        let parts = Bipartition::new(d, d).unwrap();
        let direct = !solve_local_b(&eta, parts).unwrap().is_empty();
        let decomp = operator_schmidt(&eta, parts, SCHMIDT_TOL).unwrap();
        let block = !solve_block_metrics(decomp.significant_b()).unwrap().is_empty();
        let reduction = match simultaneous_reduction(decomp.significant_b(), 1e-8, k as u64) {
            Ok(r) => Some(r.is_some()),
            Err(e) => {
                failures.push(format!("#{k}: {e}"));
                None
            }
        };
        if reduction == Some(direct) && block == direct {
            consistent += 1;
        } else if failures.len() < 3 {
            failures.push(format!("#{k}: direct {direct} block {block} reduction {reduction:?}"));
        }
        present += direct as usize;
    }
    Outcome::new(
        consistent == 100,
        format!("{consistent}/100 consistent ({present} with observables){}", if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }),
    )
}

fn criterion_9() -> Outcome {
    let (mut checked, mut worst_herm, mut worst_spec) = (0, 0.0f64, 0.0f64);
    let mut pass = true;
    for (_, m, gamma) in model_samples(8) {
        let Ok(h) = similarity_hermitize(m.matrix(), &gamma, 1e-10) else { continue };
        checked += 1;
        let herm = linalg::frobenius(&(&h - h.adjoint())) / linalg::frobenius(&h);
        let hs: Vec<Complex64> = linalg::hermitian_eigenvalues(&h).into_iter().map(|x| c(x, 0.0)).collect();
        let gs = eigen_report(&gamma, DEFAULT_TOL).eigenvalues;
        let spec = linalg::spectrum_distance(&hs, &gs).unwrap_or(f64::INFINITY) / linalg::frobenius(&h).max(1.0);
        worst_herm = worst_herm.max(herm);
        worst_spec = worst_spec.max(spec);
        pass &= herm <= 1e-10 && spec <= 1e-10;
    }
    Outcome::new(pass && checked > 0, format!("{checked} PD pairs, worst ‖h−h†‖/‖h‖ {worst_herm:.2e}, worst spectrum gap {worst_spec:.2e}"))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut metrics, mut bad) = (0, Vec::new());
    for (label, m, _) in model_samples(8) {
        metrics += 1;
        let report = scan_subsystems(&m, &ScanOptions::default()).unwrap();
        let flags = |a: &SubsystemMask| {
            let row = &report.rows[(a.bits() - 1) as usize];
            (row.local, row.extensive)
        };
        if report.rows.iter().any(|row| flags(&row.mask.reflect()) != (row.local, row.extensive)) {
            bad.push(format!("{label}: mirror"));
        }
        let mut shuffled = m.matrix().clone();
        for i in 0..m.n() {
            shuffled[(i, i)] = c(rng.random_range(-3.0..3.0), 0.0);
        }
        let other = ReducedMetric::new(shuffled, MetricKind::Custom).unwrap();
        let n = m.n();
        let changed = (1..(1u64 << n) - 1)
            .any(|bits| kernel_dim(m.matrix(), bits, DEFAULT_RANK_TOL) != kernel_dim(other.matrix(), bits, DEFAULT_RANK_TOL));
        if changed {
            bad.push(format!("{label}: diagonal"));
        }
    }
    Outcome::new(bad.is_empty(), format!("{metrics} metrics{}", if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join(", ")) }))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, Duration); 10] = [
        ("oracle equivalence", criterion_1, Duration::from_secs(120)),
        ("unit-disk classification", criterion_2, Duration::from_secs(60)),
        ("conds classification", criterion_3, Duration::from_secs(60)),
        ("parity classification", criterion_4, Duration::from_secs(30)),
        ("phase transition", criterion_5, Duration::from_secs(5)),
        ("metric lift", criterion_6, Duration::from_secs(30)),
        ("Schmidt tightness", criterion_7, Duration::from_secs(10)),
        ("tensor-product equivalence", criterion_8, Duration::from_secs(60)),
        ("similarity transform", criterion_9, Duration::from_secs(5)),
        ("mirror symmetry and diagonal independence", criterion_10, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed <= *budget;
        failed += !pass as usize;
        println!(
            "criterion {:>2} {}: {name} [{:.2}s / {}s] {}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            outcome.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
