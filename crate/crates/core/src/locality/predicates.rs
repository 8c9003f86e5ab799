//! Closed-form classifications of extensively local subsystems.

use serde::{Deserialize, Serialize};

use super::SubsystemMask;
use crate::error::{Error, Result};
use crate::linalg;
use crate::models::ReducedMetric;

/// A map `f: [n] → [n]` with `f ∘ f = id`, stored 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Involution(Vec<usize>);

impl Involution {
    /// From the images `f(1), …, f(n)`.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        for (k, &fk) in images.iter().enumerate() {
            if fk < 1 || fk > n || images[fk - 1] != k + 1 {
                return Err(Error::Parameter(format!("not an involution at site {}", k + 1)));
            }
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((1..=n).collect())
    }

    /// `i ↦ n + 1 − i`.
    pub fn parity(n: usize) -> Self {
        Self((1..=n).rev().collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, site: usize) -> usize {
        self.0[site - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }
}

/// The involution `f` with `M_ij ≠ 0 ⇔ i = j or i = f(j)`, if the sparsity
/// pattern of `M` has that shape. Entries below `tol · max |M_ij|` count as zero.
pub fn involution_of(metric: &ReducedMetric, tol: f64) -> Option<Involution> {
    let m = metric.matrix();
    let n = metric.n();
    let cut = tol * linalg::max_abs(m);
    let nonzero = |i: usize, j: usize| m[(i, j)].norm() > cut;
    let mut images = Vec::with_capacity(n);
    for i in 0..n {
        if !nonzero(i, i) {
            return None;
        }
        let partners: Vec<usize> = (0..n).filter(|&j| j != i && nonzero(i, j)).collect();
        match partners.as_slice() {
            [] => images.push(i + 1),
            [j] => images.push(j + 1),
            _ => return None,
        }
    }
    Involution::new(images).ok()
}

/// `f(A) = A`.
pub fn predict_involution(a: &SubsystemMask, f: &Involution) -> bool {
    f.n() == a.n() && a.sites().into_iter().all(|s| a.contains(f.apply(s)))
}

/// Classification for the farthest-impurity metric on the unit circle:
/// no one-site components, or `A = {1, n} ∪ B` with `B` free of one-site
/// components.
pub fn predict_unit_disk(a: &SubsystemMask) -> bool {
    let n = a.n();
    let comps = a.profile().components;
    if comps.iter().all(|c| c.len() != 1) {
        return true;
    }
    if a.contains(1) && a.contains(n) && n > 1 {
        return comps
            .iter()
            .filter(|c| c.as_slice() != [1] && c.as_slice() != [n])
            .all(|c| c.len() != 1);
    }
    false
}

/// Classification for the farthest-impurity metric off the unit circle: the
/// conjunction of four conditions on the components of `G_A`.
pub fn predict_conds(a: &SubsystemMask) -> bool {
    let n = a.n();
    let profile = a.profile();
    let comps = &profile.components;
    let is_edge_pair = |c: &[usize]| c == [1, 2] || (n >= 2 && c == [n - 1, n]);

    // Short components other than the two edge pairs cannot stand alone.
    if comps.len() == 1 && comps[0].len() <= 2 && !is_edge_pair(&comps[0]) {
        return false;
    }
    // A single site i needs i − 2 and i + 2 in A whenever they exist.
    for c in comps.iter().filter(|c| c.len() == 1) {
        let i = c[0];
        if i > 2 && !a.contains(i - 2) {
            return false;
        }
        if i + 2 <= n && !a.contains(i + 2) {
            return false;
        }
    }
    // Two-site components sit within distance two of another component.
    for (k, c) in comps.iter().enumerate() {
        if c.len() == 2 && !is_edge_pair(c) && profile.nearest(k).is_none_or(|d| d > 2) {
            return false;
        }
    }
    // One-site edge components only at the chain ends.
    let (left, right) = (profile.left(), profile.right());
    if left.len() == 1 && left != [1] {
        return false;
    }
    if right.len() == 1 && right != [n] {
        return false;
    }
    true
}
