use rayon::prelude::*;
use serde::Serialize;

use super::kernel::{kernel_certificate, kernel_dim};
use super::predicates::{predict_conds, predict_involution, predict_unit_disk, Involution};
use super::SubsystemMask;
use crate::error::{Error, Result};
use crate::linalg::CVector;
use crate::models::ReducedMetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanFamily {
    /// Every nonempty subset; subject to the size cap.
    All,
    /// Runs of consecutive sites.
    Connected,
    /// Subsets with `{n + 1 − i : i ∈ A} = A`.
    ParitySymmetric,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    None,
    UnitDisk,
    Conds,
    /// Invariance under `i ↦ n + 1 − i`.
    Parity,
    Involution(Involution),
}

impl Predicate {
    pub fn evaluate(&self, a: &SubsystemMask) -> Option<bool> {
        match self {
            Predicate::None => None,
            Predicate::UnitDisk => Some(predict_unit_disk(a)),
            Predicate::Conds => Some(predict_conds(a)),
            Predicate::Parity => Some(predict_involution(a, &Involution::parity(a.n()))),
            Predicate::Involution(f) => Some(predict_involution(a, f)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Predicate::None => "none",
            Predicate::UnitDisk => "unit-disk",
            Predicate::Conds => "conds",
            Predicate::Parity => "parity",
            Predicate::Involution(_) => "involution",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOptions {
    pub family: ScanFamily,
    pub predicate: Predicate,
    /// Rank tolerance for `K(A)`.
    pub tol: f64,
    /// Largest `n` for the exhaustive family.
    pub cap_n: usize,
    /// Seed for witness vectors; `None` skips them.
    pub witness_seed: Option<u64>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            family: ScanFamily::All,
            predicate: Predicate::None,
            tol: super::DEFAULT_RANK_TOL,
            cap_n: 20,
            witness_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityRow {
    pub mask: SubsystemMask,
    #[serde(rename = "K")]
    pub k: usize,
    pub local: bool,
    pub extensive: bool,
    #[serde(skip)]
    pub witness: Option<CVector>,
    pub predicate: Option<bool>,
    pub agree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityReport {
    pub n: usize,
    pub family: ScanFamily,
    pub predicate: Predicate,
    /// Sorted by mask value.
    pub rows: Vec<LocalityRow>,
}

impl LocalityReport {
    /// `(agreeing, compared)` when a predicate was evaluated.
    pub fn agreement(&self) -> Option<(usize, usize)> {
        let compared: Vec<bool> = self.rows.iter().filter_map(|r| r.agree).collect();
        if compared.is_empty() {
            return None;
        }
        Some((compared.iter().filter(|&&a| a).count(), compared.len()))
    }

    pub fn disagreements(&self) -> Vec<&LocalityRow> {
        self.rows.iter().filter(|r| r.agree == Some(false)).collect()
    }

    pub fn extensive_masks(&self) -> Vec<SubsystemMask> {
        self.rows.iter().filter(|r| r.extensive).map(|r| r.mask).collect()
    }
}

fn family_masks(n: usize, family: ScanFamily, cap: usize) -> Result<Vec<u64>> {
    match family {
        ScanFamily::All => {
            if n > cap {
                return Err(Error::CapExceeded { n, cap });
            }
            Ok((1..(1u64 << n)).collect())
        }
        ScanFamily::Connected => {
            let mut out = Vec::with_capacity(n * (n + 1) / 2);
            for start in 0..n {
                for len in 1..=(n - start) {
                    let run = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
                    out.push(run << start);
                }
            }
            out.sort_unstable();
            Ok(out)
        }
        ScanFamily::ParitySymmetric => {
            let half = n.div_ceil(2);
            if half > cap {
                return Err(Error::CapExceeded { n, cap: 2 * cap });
            }
            let mut out: Vec<u64> = (1..(1u64 << half))
                .map(|h| {
                    let mut bits = 0u64;
                    for k in 0..half {
                        if h >> k & 1 == 1 {
                            bits |= 1 << k | 1 << (n - 1 - k);
                        }
                    }
                    bits
                })
                .collect();
            out.sort_unstable();
            Ok(out)
        }
    }
}

/// `K(A)`, local and extensive flags for every subsystem in the family.
pub fn scan_subsystems(metric: &ReducedMetric, options: &ScanOptions) -> Result<LocalityReport> {
    let n = metric.n();
    if n > super::MAX_SITES {
        return Err(Error::CapExceeded { n, cap: super::MAX_SITES });
    }
    let masks = family_masks(n, options.family, options.cap_n)?;
    let m = metric.matrix();
    let tol = options.tol;

    // The exhaustive family reuses every K(A − {i}) from one table.
    let table: Option<Vec<u32>> = (options.family == ScanFamily::All).then(|| {
        (0..(1u64 << n))
            .into_par_iter()
            .map(|bits| kernel_dim(m, bits, tol) as u32)
            .collect()
    });
    let k_of = |bits: u64| match &table {
        Some(t) => t[bits as usize] as usize,
        None => kernel_dim(m, bits, tol),
    };

    let rows = masks
        .par_iter()
        .map(|&bits| -> Result<LocalityRow> {
            let mask = SubsystemMask::from_bits(n, bits)?;
            let k = k_of(bits);
            let extensive = (0..n).filter(|&i| bits >> i & 1 == 1).all(|i| k > k_of(bits & !(1u64 << i)));
            let witness = match options.witness_seed {
                Some(seed) if k > 0 => kernel_certificate(metric, &mask, tol)?.witness(seed),
                _ => None,
            };
            let predicate = options.predicate.evaluate(&mask);
            Ok(LocalityRow {
                mask,
                k,
                local: k > 0,
                extensive,
                witness,
                predicate,
                agree: predicate.map(|p| p == extensive),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(LocalityReport {
        n,
        family: options.family,
        predicate: options.predicate.clone(),
        rows,
    })
}
