mod common;

use proptest::prelude::*;
use quasilocal::linalg::{self, c};
use quasilocal::locality::{
    kernel_certificate, kernel_dim, observable_generators, scan_subsystems, Predicate, ScanOptions, DEFAULT_RANK_TOL,
};
use quasilocal::models::{farthest_metric, nearest_metric, MetricKind, ReducedMetric};
use quasilocal::spectral::check_pt_metric;
use quasilocal::{Complex64, SubsystemMask};

fn sample_metrics() -> Vec<ReducedMetric> {
    let mut rng = common::rng(20);
    let mut out = Vec::new();
    for n in [5, 8, 10] {
        for g in [c(0.0, 0.5), c(0.0, 2.0), Complex64::from_polar(1.0, 0.7), c(0.3, 0.4)] {
            out.push(farthest_metric(n, g).unwrap());
        }
    }
    for half in [2, 3, 5] {
        let mut p = common::symmetric_chain(&mut rng, 2 * half, half, c(0.0, 0.0));
        p.onsite = vec![0.0; 2 * half];
        p.gamma = c(0.1, 0.4 * p.t(half).norm());
        p.beta = 0.2;
        out.push(nearest_metric(&p).unwrap());
    }
    let mut random = common::random_hermitian(&mut rng, 6);
    // Sparsify so that kernels are nontrivial.
    for i in 0..6 {
        for j in 0..6 {
            if (i + 2 * j) % 3 == 0 && i != j {
                random[(i, j)] = c(0.0, 0.0);
                random[(j, i)] = c(0.0, 0.0);
            }
        }
    }
    out.push(ReducedMetric::new(random, MetricKind::Custom).unwrap());
    out
}

#[test]
fn kernel_dimension_is_monotone() {
    for m in sample_metrics() {
        let n = m.n();
        let k: Vec<usize> = (0..(1u64 << n)).map(|bits| kernel_dim(m.matrix(), bits, DEFAULT_RANK_TOL)).collect();
        assert_eq!(k[0], 0);
        assert_eq!(k[(1 << n) - 1], n);
        for bits in 1..(1u64 << n) {
            for i in 0..n {
                if bits >> i & 1 == 1 {
                    assert!(k[(bits & !(1 << i)) as usize] <= k[bits as usize], "n={n} bits={bits:b}");
                }
            }
        }
    }
}

#[test]
fn disjoint_unions_of_extensive_sets_are_extensive() {
    for m in sample_metrics() {
        let r = scan_subsystems(&m, &ScanOptions::default()).unwrap();
        let ext: Vec<u64> = r.extensive_masks().iter().map(|a| a.bits()).collect();
        for &a in &ext {
            for &b in &ext {
                if a & b == 0 {
                    assert!(r.rows[(a | b) as usize - 1].extensive, "{:b} ∪ {:b}", a, b);
                }
            }
        }
    }
}

#[test]
fn pt_symmetric_metrics_have_mirror_symmetric_flags() {
    for m in sample_metrics().into_iter().filter(|m| check_pt_metric(m.matrix(), 1e-12)) {
        let r = scan_subsystems(&m, &ScanOptions::default()).unwrap();
        for row in &r.rows {
            let mirror = &r.rows[row.mask.reflect().bits() as usize - 1];
            assert_eq!((row.local, row.extensive, row.k), (mirror.local, mirror.extensive, mirror.k));
        }
    }
}

#[test]
fn generators_are_quasi_hermitian() {
    for m in sample_metrics().into_iter().filter(|m| m.n() <= 8) {
        for a in SubsystemMask::all(m.n()) {
            let cert = kernel_certificate(&m, &a, DEFAULT_RANK_TOL).unwrap();
            assert!(cert.max_residual(&m) <= 1e-10);
            for g in observable_generators(&cert) {
                let r = linalg::frobenius(&(m.matrix() * &g - g.adjoint() * m.matrix()));
                assert!(r <= 1e-10 * linalg::frobenius(m.matrix()) * linalg::frobenius(&g).max(1e-300), "{a}");
                for s in a.complement_sites() {
                    assert!(g.row(s - 1).iter().chain(g.column(s - 1).iter()).all(|z| z.norm() == 0.0));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn diagonal_never_matters(seed in any::<u64>(), n in 2usize..9, gamma in common::off_circle_gamma()) {
        use rand::Rng;
        let mut rng = common::rng(seed);
        let m = farthest_metric(n, gamma).unwrap();
        let mut shifted = m.matrix().clone();
        for i in 0..n {
            shifted[(i, i)] = c(rng.random_range(-5.0..5.0), 0.0);
        }
        for bits in 1..(1u64 << n) - 1 {
            prop_assert_eq!(kernel_dim(m.matrix(), bits, DEFAULT_RANK_TOL), kernel_dim(&shifted, bits, DEFAULT_RANK_TOL));
        }
    }

    #[test]
    fn conds_matches_off_circle(n in 4usize..11, gamma in common::off_circle_gamma()) {
        prop_assume!(gamma.im.abs() > 0.05);
        let m = farthest_metric(n, gamma).unwrap();
        let opts = ScanOptions { predicate: Predicate::Conds, ..ScanOptions::default() };
        let (agree, total) = scan_subsystems(&m, &opts).unwrap().agreement().unwrap();
        prop_assert_eq!(agree, total);
    }

    #[test]
    fn unit_disk_matches_on_circle(n in 4usize..11, theta in 0.05..1.5f64) {
        let m = farthest_metric(n, Complex64::from_polar(1.0, theta)).unwrap();
        let opts = ScanOptions { predicate: Predicate::UnitDisk, ..ScanOptions::default() };
        let (agree, total) = scan_subsystems(&m, &opts).unwrap().agreement().unwrap();
        prop_assert_eq!(agree, total);
    }
}
