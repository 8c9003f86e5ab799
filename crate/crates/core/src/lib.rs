//! Local observable algebras for quasi-Hermitian (PT-symmetric) lattice fermions.
//!
//! The crate is organised around the objects that appear when one asks which
//! subsystems of a non-Hermitian free-fermion chain carry physical observables:
//!
//! - [`models`]: first-quantized PT-symmetric tight-binding Hamiltonians and
//!   their analytic reduced metrics.
//! - [`spectral`]: eigenstructure diagnostics, quasi-Hermiticity residuals,
//!   similarity transforms and PT phase scans.
//! - [`locality`]: kernel-rank certificates `K(A) = dim ker M^{A'A}`,
//!   extensive-locality decisions and the analytic classification predicates.
//! - [`fock`]: the exact `2^n` Fock-space picture (Jordan-Wigner operators,
//!   metric lift, brute-force locality oracle, states and expectations).
//! - [`schmidt`]: tensor-product locality via the operator Schmidt
//!   decomposition of a metric.
//! - [`io`]: the JSON matrix format and fixed-precision float formatting.

pub mod error;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod locality;
pub mod models;
pub mod schmidt;
pub mod spectral;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use locality::{LocalityReport, SubsystemMask};
pub use models::{ChainParams, FirstQuantizedHamiltonian, MetricKind, ReducedMetric};
pub use num_complex::Complex64;

/// Crate version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
