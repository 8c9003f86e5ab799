#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;
use quasilocal::linalg::{self, c, CMatrix, ONE};
use quasilocal::models::ChainParams;
use quasilocal::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    linalg::symmetrize(&random_matrix(rng, d))
}

pub fn random_pd(rng: &mut ChaCha8Rng, d: usize) -> CMatrix {
    let a = random_matrix(rng, d);
    linalg::symmetrize(&(&a * a.adjoint() + CMatrix::identity(d, d) * c(0.1, 0.0)))
}

/// A chain with parity-symmetric hopping phases and on-site potentials.
pub fn symmetric_chain(rng: &mut ChaCha8Rng, n: usize, m: usize, gamma: Complex64) -> ChainParams {
    let mut p = ChainParams::uniform(n, m, gamma, ONE);
    for i in 1..=n / 2 {
        let phase = rng.random_range(-PI..PI);
        p.hoppings[i - 1] = Complex64::from_polar(rng.random_range(0.5..1.5), phase);
        p.hoppings[n - i - 1] = Complex64::from_polar(rng.random_range(0.5..1.5), phase);
    }
    p
}

/// [`symmetric_chain`] with `|t_i| = |t_{n−i}|` as well.
pub fn mirror_chain(rng: &mut ChaCha8Rng, n: usize, m: usize, gamma: Complex64) -> ChainParams {
    let mut p = symmetric_chain(rng, n, m, gamma);
    for i in 1..=n / 2 {
        p.hoppings[n - i - 1] = p.hoppings[i - 1];
    }
    for i in 0..n.div_ceil(2) {
        let v = rng.random_range(-1.0..1.0);
        p.onsite[i] = v;
        p.onsite[n - 1 - i] = v;
    }
    p
}

/// `γ` away from the unit circle and the real axis.
pub fn off_circle_gamma() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, 0.1..3.0f64, any::<bool>())
        .prop_filter("off the unit circle", |(re, im, _)| ((re * re + im * im).sqrt() - 1.0).abs() > 0.05)
        .prop_map(|(re, im, flip)| c(re, if flip { -im } else { im }))
}
