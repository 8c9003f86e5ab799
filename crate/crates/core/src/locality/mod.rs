//! Kernel-rank locality certificates for free-fermion reduced metrics.
//!
//! For a subsystem `A ⊆ [n]` with complement `A'`, local reduced observables
//! exist iff `K(A) = dim ker M^{A'A} > 0`, and extensively local ones iff
//! `K(A) > K(A − {i})` for every `i ∈ A` (with `K(∅) = 0`).

mod kernel;
mod predicates;
mod scan;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use kernel::{
    block, is_extensively_local, kernel_certificate, kernel_dim, observable_generators, LocalObservableBasis,
    DEFAULT_RANK_TOL,
};
pub use predicates::{involution_of, predict_conds, predict_involution, predict_unit_disk, Involution};
pub use scan::{scan_subsystems, LocalityReport, LocalityRow, Predicate, ScanFamily, ScanOptions};

/// Largest lattice handled by the bitmask encoding.
pub const MAX_SITES: usize = 64;

/// A nonempty subset of `[n] = {1, …, n}`, stored as a bitmask (site `i` is
/// bit `i − 1`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsystemMask {
    n: usize,
    bits: u64,
}

fn full_bits(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl SubsystemMask {
    /// From 1-based site labels; duplicates are merged.
    pub fn new(n: usize, sites: &[usize]) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return Err(Error::Parameter(format!("lattice size {n} outside 1..={MAX_SITES}")));
        }
        let mut bits = 0u64;
        for &s in sites {
            if s < 1 || s > n {
                return Err(Error::Parameter(format!("site {s} outside 1..={n}")));
            }
            bits |= 1 << (s - 1);
        }
        Self::from_bits(n, bits)
    }

    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return Err(Error::Parameter(format!("lattice size {n} outside 1..={MAX_SITES}")));
        }
        if bits == 0 {
            return Err(Error::Parameter("subsystem must be nonempty".into()));
        }
        if bits & !full_bits(n) != 0 {
            return Err(Error::Parameter(format!("mask {bits:#x} has sites beyond n = {n}")));
        }
        Ok(Self { n, bits })
    }

    pub fn full(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return Err(Error::Parameter(format!("lattice size {n} outside 1..={MAX_SITES}")));
        }
        Self::from_bits(n, full_bits(n))
    }

    /// Every nonempty subset of `[n]` in increasing bitmask order.
    pub fn all(n: usize) -> impl Iterator<Item = SubsystemMask> {
        let top = full_bits(n);
        (1..=top).map(move |bits| SubsystemMask { n, bits })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    /// Always false; masks are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_full(&self) -> bool {
        self.bits == full_bits(self.n)
    }

    pub fn contains(&self, site: usize) -> bool {
        site >= 1 && site <= self.n && self.bits >> (site - 1) & 1 == 1
    }

    /// Ascending 1-based sites.
    pub fn sites(&self) -> Vec<usize> {
        (1..=self.n).filter(|&s| self.contains(s)).collect()
    }

    /// Ascending 0-based indices.
    pub fn indices(&self) -> Vec<usize> {
        (0..self.n).filter(|&k| self.bits >> k & 1 == 1).collect()
    }

    /// Sites of `A' = [n] − A`, ascending.
    pub fn complement_sites(&self) -> Vec<usize> {
        (1..=self.n).filter(|&s| !self.contains(s)).collect()
    }

    /// `A'` as a mask, or `None` when `A = [n]`.
    pub fn complement(&self) -> Option<SubsystemMask> {
        let bits = full_bits(self.n) & !self.bits;
        (bits != 0).then_some(SubsystemMask { n: self.n, bits })
    }

    /// `A − {site}`, or `None` if that is empty.
    pub fn without(&self, site: usize) -> Option<SubsystemMask> {
        let bits = self.bits & !(1u64 << (site - 1));
        (bits != 0).then_some(SubsystemMask { n: self.n, bits })
    }

    /// Mirror image `{n + 1 − i : i ∈ A}`.
    pub fn reflect(&self) -> SubsystemMask {
        let mut bits = 0u64;
        for k in 0..self.n {
            if self.bits >> k & 1 == 1 {
                bits |= 1 << (self.n - 1 - k);
            }
        }
        SubsystemMask { n: self.n, bits }
    }

    pub fn is_connected(&self) -> bool {
        let shifted = self.bits >> self.bits.trailing_zeros();
        shifted & shifted.wrapping_add(1) == 0
    }

    pub fn profile(&self) -> ConnectivityProfile {
        ConnectivityProfile::of(self)
    }
}

impl fmt::Debug for SubsystemMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubsystemMask(n={}, {:?})", self.n, self.sites())
    }
}

impl fmt::Display for SubsystemMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sites: Vec<String> = self.sites().iter().map(|s| s.to_string()).collect();
        write!(f, "{{{}}}", sites.join(","))
    }
}

impl Serialize for SubsystemMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.sites().serialize(s)
    }
}

/// Component structure of the graph `G_A` (sites of `A`, edges between
/// consecutive sites).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityProfile {
    /// Maximal runs of consecutive sites, left to right.
    pub components: Vec<Vec<usize>>,
    /// `d_A(C_k, C_l)`: smallest chain distance between members.
    pub distances: Vec<Vec<usize>>,
}

impl ConnectivityProfile {
    fn of(mask: &SubsystemMask) -> Self {
        let mut components: Vec<Vec<usize>> = Vec::new();
        for s in mask.sites() {
            match components.last_mut() {
                Some(run) if *run.last().unwrap() + 1 == s => run.push(s),
                _ => components.push(vec![s]),
            }
        }
        let k = components.len();
        let mut distances = vec![vec![0; k]; k];
        for a in 0..k {
            for b in (a + 1)..k {
                // Components are ordered, so the gap is between the right end
                // of the left one and the left end of the right one.
                let d = components[b][0] - components[a].last().unwrap();
                distances[a][b] = d;
                distances[b][a] = d;
            }
        }
        Self { components, distances }
    }

    /// Leftmost component `C_L`.
    pub fn left(&self) -> &[usize] {
        &self.components[0]
    }

    /// Rightmost component `C_R`.
    pub fn right(&self) -> &[usize] {
        self.components.last().unwrap()
    }

    /// `min_{C' ≠ C} d_A(C_k, C')`, or `None` for a single component.
    pub fn nearest(&self, k: usize) -> Option<usize> {
        (0..self.components.len()).filter(|&l| l != k).map(|l| self.distances[k][l]).min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mask_basics() {
        let a = SubsystemMask::new(5, &[4, 1, 2, 2]).unwrap();
        assert_eq!(a.sites(), vec![1, 2, 4]);
        assert_eq!(a.indices(), vec![0, 1, 3]);
        assert_eq!(a.complement_sites(), vec![3, 5]);
        assert_eq!(a.len(), 3);
        assert_eq!(a.reflect().sites(), vec![2, 4, 5]);
        assert_eq!(a.without(4).unwrap().sites(), vec![1, 2]);
        assert!(SubsystemMask::new(1, &[1]).unwrap().without(1).is_none());
        assert!(SubsystemMask::full(3).unwrap().complement().is_none());
        assert_eq!(a.to_string(), "{1,2,4}");
    }

    #[test]
    fn mask_validation() {
        assert!(SubsystemMask::new(4, &[]).is_err());
        assert!(SubsystemMask::new(4, &[0]).is_err());
        assert!(SubsystemMask::new(4, &[5]).is_err());
        assert!(SubsystemMask::from_bits(3, 0b1000).is_err());
        assert_eq!(SubsystemMask::all(3).count(), 7);
        assert!(SubsystemMask::full(64).unwrap().is_full());
    }

    #[test]
    fn connectivity() {
        assert!(SubsystemMask::new(6, &[2, 3, 4]).unwrap().is_connected());
        assert!(!SubsystemMask::new(6, &[2, 4]).unwrap().is_connected());
        let p = SubsystemMask::new(9, &[1, 2, 5, 8, 9]).unwrap().profile();
        assert_eq!(p.components, vec![vec![1, 2], vec![5], vec![8, 9]]);
        assert_eq!(p.distances[0][1], 3);
        assert_eq!(p.distances[1][2], 3);
        assert_eq!(p.distances[0][2], 6);
        assert_eq!(p.distances[2][0], 6);
        assert_eq!(p.left(), &[1, 2]);
        assert_eq!(p.right(), &[8, 9]);
        assert_eq!(p.nearest(1), Some(3));
        for k in 0..3 {
            assert_eq!(p.distances[k][k], 0);
        }
    }

    #[test]
    fn serializes_as_site_list() {
        let a = SubsystemMask::new(6, &[5, 2]).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), "[2,5]");
    }
}
