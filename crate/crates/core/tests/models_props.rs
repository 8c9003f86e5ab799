mod common;

use proptest::prelude::*;
use quasilocal::linalg::{self, c};
use quasilocal::models::{build_pt_hamiltonian, farthest_metric, nearest_metric, strip_phases};
use quasilocal::spectral::{check_pt_metric, eigen_report, quasi_hermiticity_residual, DEFAULT_TOL};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_gamma_strips_to_hermitian(seed in any::<u64>(), n in 2usize..10, g in -2.0..2.0f64) {
        let mut rng = common::rng(seed);
        let m = rng_m(&mut rng, n);
        let p = common::mirror_chain(&mut rng, n, m, c(g, 0.0));
        let h = build_pt_hamiltonian(&strip_phases(&p).unwrap()).unwrap().matrix;
        prop_assert!(linalg::frobenius(&(&h - h.adjoint())) <= 1e-12 * linalg::frobenius(&h));
        let id = linalg::CMatrix::identity(n, n);
        prop_assert!(quasi_hermiticity_residual(&id, &h).unwrap() <= 1e-12);
    }

    #[test]
    fn toy_metrics_are_exactly_hermitian_and_pt_symmetric(seed in any::<u64>(), half in 1usize..6, gamma in common::off_circle_gamma()) {
        let mut rng = common::rng(seed);
        let n = 2 * half;
        let far = farthest_metric(n + 1, gamma).unwrap();
        let mut p = common::symmetric_chain(&mut rng, n, half, c(0.0, 0.0));
        p.onsite = vec![0.0; n];
        p.gamma = c(gamma.re, 0.4 * p.t(half).norm() * gamma.im.signum());
        p.beta = 0.3;
        let near = nearest_metric(&p).unwrap();
        for m in [far.matrix(), near.matrix()] {
            prop_assert_eq!(m.adjoint(), m.clone());
            prop_assert!(check_pt_metric(m, 1e-12));
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && i != n - 1 - j {
                    prop_assert_eq!(near.matrix()[(i, j)], c(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn strip_phases_preserves_spectrum(seed in any::<u64>(), n in 2usize..9, gr in -1.0..1.0f64, gi in -1.5..1.5f64) {
        let mut rng = common::rng(seed);
        let m = rng_m(&mut rng, n);
        let p = common::symmetric_chain(&mut rng, n, m, c(gr, gi));
        let before = eigen_report(&build_pt_hamiltonian(&p).unwrap().matrix, DEFAULT_TOL).eigenvalues;
        let after = eigen_report(&build_pt_hamiltonian(&strip_phases(&p).unwrap()).unwrap().matrix, DEFAULT_TOL).eigenvalues;
        // Eigenvalues at exceptional points are only accurate to √ε.
        let report = eigen_report(&build_pt_hamiltonian(&p).unwrap().matrix, DEFAULT_TOL);
        let tol = if report.diagonalizable { 1e-10 } else { 1e-6 };
        prop_assert!(linalg::spectrum_distance(&before, &after).unwrap() <= tol * report.spectral_radius.max(1.0));
    }
}

fn rng_m(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> usize {
    use rand::Rng;
    rng.random_range(1..=n.div_ceil(2))
}
