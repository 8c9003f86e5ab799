//! Python bindings. Matrices cross the boundary as nested lists of `complex`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use quasilocal::fock::{self, BruteForceOptions, FockSpace};
use quasilocal::locality::{self, Predicate, ScanFamily, ScanOptions, DEFAULT_RANK_TOL};
use quasilocal::models::{self, MetricKind};
use quasilocal::schmidt::{self, Bipartition, SCHMIDT_TOL};
use quasilocal::{spectral, CMatrix, Error};

type Rows = Vec<Vec<Complex64>>;

fn err(e: Error) -> PyErr {
    match e {
        Error::CapExceeded { .. } | Error::Numerical(_) | Error::ReductionFailed { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: Rows) -> PyResult<CMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(CMatrix::from_fn(n, cols, |i, j| rows[i][j]))
}

fn to_rows(m: &CMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Parameters of the PT-symmetric tight-binding chain.
#[pyclass(name = "ChainParams", module = "quasilocal_py", skip_from_py_object)]
#[derive(Clone)]
struct PyChainParams {
    inner: models::ChainParams,
}

#[pymethods]
impl PyChainParams {
    #[new]
    #[pyo3(signature = (n, m, gamma, t = Complex64::new(1.0, 0.0), hoppings = None, onsite = None, beta = 0.0))]
    fn new(
        n: usize,
        m: usize,
        gamma: Complex64,
        t: Complex64,
        hoppings: Option<Vec<Complex64>>,
        onsite: Option<Vec<f64>>,
        beta: f64,
    ) -> PyResult<Self> {
        let mut p = models::ChainParams::uniform(n, m, gamma, t);
        if let Some(h) = hoppings {
            p.hoppings = h;
        }
        if let Some(v) = onsite {
            p.onsite = v;
        }
        p.beta = beta;
        p.validate().map_err(err)?;
        Ok(Self { inner: p })
    }

    /// Farthest-impurity XX chain.
    #[staticmethod]
    fn xx(n: usize, gamma: Complex64) -> PyResult<Self> {
        let p = models::ChainParams::xx(n, gamma);
        p.validate().map_err(err)?;
        Ok(Self { inner: p })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn gamma(&self) -> Complex64 {
        self.inner.gamma
    }

    #[getter]
    fn hoppings(&self) -> Vec<Complex64> {
        self.inner.hoppings.clone()
    }

    #[getter]
    fn onsite(&self) -> Vec<f64> {
        self.inner.onsite.clone()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    fn hamiltonian(&self) -> PyResult<Rows> {
        Ok(to_rows(&models::build_pt_hamiltonian(&self.inner).map_err(err)?.matrix))
    }

    fn strip_phases(&self) -> PyResult<Self> {
        Ok(Self {
            inner: models::strip_phases(&self.inner).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "ChainParams(n={}, m={}, gamma={}, beta={})",
            self.inner.n, self.inner.m, self.inner.gamma, self.inner.beta
        )
    }
}

/// Hermitian single-particle metric.
#[pyclass(name = "ReducedMetric", module = "quasilocal_py", skip_from_py_object)]
#[derive(Clone)]
struct PyReducedMetric {
    inner: models::ReducedMetric,
}

#[pymethods]
impl PyReducedMetric {
    #[new]
    fn new(matrix: Rows) -> PyResult<Self> {
        let inner = models::ReducedMetric::new(to_matrix(matrix)?, MetricKind::Custom).map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn farthest(n: usize, gamma: Complex64) -> PyResult<Self> {
        Ok(Self {
            inner: models::farthest_metric(n, gamma).map_err(err)?,
        })
    }

    #[staticmethod]
    fn nearest(params: &PyChainParams) -> PyResult<Self> {
        Ok(Self {
            inner: models::nearest_metric(&params.inner).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self {
            inner: models::ReducedMetric::identity(n),
        }
    }

    #[staticmethod]
    fn diagonal(entries: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: models::ReducedMetric::diagonal(&entries).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn kind(&self) -> String {
        format!("{:?}", self.inner.kind).to_lowercase()
    }

    fn matrix(&self) -> Rows {
        to_rows(self.inner.matrix())
    }

    /// `(positive_definite, min_eigenvalue)`.
    fn positive_definiteness(&self) -> PyResult<(bool, f64)> {
        spectral::positive_definiteness(self.inner.matrix(), 0.0).map_err(err)
    }

    /// `K(A) = dim ker M^{A'A}` for 1-based `sites`.
    #[pyo3(signature = (sites, tol = DEFAULT_RANK_TOL))]
    fn kernel_dim(&self, sites: Vec<usize>, tol: f64) -> PyResult<usize> {
        let a = locality::SubsystemMask::new(self.inner.n(), &sites).map_err(err)?;
        Ok(locality::kernel_dim(self.inner.matrix(), a.bits(), tol))
    }

    #[pyo3(signature = (sites, tol = DEFAULT_RANK_TOL))]
    fn is_extensively_local(&self, sites: Vec<usize>, tol: f64) -> PyResult<bool> {
        let a = locality::SubsystemMask::new(self.inner.n(), &sites).map_err(err)?;
        locality::is_extensively_local(&self.inner, &a, tol).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("ReducedMetric(n={}, kind={})", self.inner.n(), self.kind())
    }
}

/// Result of a subsystem scan; rows are dicts sorted by mask.
#[pyclass(name = "LocalityReport", module = "quasilocal_py")]
struct PyLocalityReport {
    inner: locality::LocalityReport,
}

#[pymethods]
impl PyLocalityReport {
    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    fn __len__(&self) -> usize {
        self.inner.rows.len()
    }

    fn rows<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .rows
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("mask", r.mask.sites())?;
                d.set_item("K", r.k)?;
                d.set_item("local", r.local)?;
                d.set_item("extensive", r.extensive)?;
                d.set_item("predicate", r.predicate)?;
                d.set_item("agree", r.agree)?;
                Ok(d)
            })
            .collect()
    }

    /// `(agreeing, compared)`, or `None` without a predicate.
    fn agreement(&self) -> Option<(usize, usize)> {
        self.inner.agreement()
    }

    fn extensive(&self) -> Vec<Vec<usize>> {
        self.inner.extensive_masks().iter().map(|a| a.sites()).collect()
    }
}

#[pyfunction]
#[pyo3(signature = (metric, predicate = "none", family = "all", tol = DEFAULT_RANK_TOL, cap_n = 20))]
fn scan_subsystems(
    py: Python<'_>,
    metric: &PyReducedMetric,
    predicate: &str,
    family: &str,
    tol: f64,
    cap_n: usize,
) -> PyResult<PyLocalityReport> {
    let predicate = match predicate {
        "none" => Predicate::None,
        "unit_disk" => Predicate::UnitDisk,
        "conds" => Predicate::Conds,
        "parity" => Predicate::Parity,
        other => return Err(PyValueError::new_err(format!("unknown predicate {other:?}"))),
    };
    let family = match family {
        "all" => ScanFamily::All,
        "connected" => ScanFamily::Connected,
        "parity_symmetric" => ScanFamily::ParitySymmetric,
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    };
    let options = ScanOptions {
        family,
        predicate,
        tol,
        cap_n,
        witness_seed: None,
    };
    let inner = py.detach(|| locality::scan_subsystems(&metric.inner, &options)).map_err(err)?;
    Ok(PyLocalityReport { inner })
}

/// Fock-space oracle over every subsystem: dicts with `mask`,
/// `dim_local`, `local`, `extensive`, `gap`.
#[pyfunction]
#[pyo3(signature = (metric, cap_n = fock::ORACLE_CAP))]
fn brute_force_scan<'py>(py: Python<'py>, metric: &PyReducedMetric, cap_n: usize) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let rows = py
        .detach(|| {
            let space = FockSpace::new(metric.inner.n())?;
            let eta = fock::lift_metric(&space, &metric.inner)?;
            let opts = BruteForceOptions {
                cap_n,
                ..BruteForceOptions::default()
            };
            fock::brute_force_scan(&space, &eta, &opts)
        })
        .map_err(err)?;
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("mask", r.mask.sites())?;
            d.set_item("dim_local", r.dim_local)?;
            d.set_item("local", r.local)?;
            d.set_item("extensive", r.extensive)?;
            d.set_item("gap", r.gap)?;
            Ok(d)
        })
        .collect()
}

/// The Fock-space metric `η` of a reduced metric, in the occupation basis.
#[pyfunction]
fn lift_metric(metric: &PyReducedMetric) -> PyResult<Rows> {
    let space = FockSpace::new(metric.inner.n()).map_err(err)?;
    Ok(to_rows(&fock::lift_metric(&space, &metric.inner).map_err(err)?.matrix))
}

/// Eigenvalues and the phase class of a first-quantized operator.
#[pyfunction]
#[pyo3(signature = (matrix, tol = spectral::DEFAULT_TOL))]
fn eigen_report<'py>(py: Python<'py>, matrix: Rows, tol: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = spectral::eigen_report(&to_matrix(matrix)?, tol);
    let d = PyDict::new(py);
    d.set_item("eigenvalues", r.eigenvalues.clone())?;
    d.set_item("phase_class", format!("{:?}", r.phase_class()).to_lowercase())?;
    d.set_item("diagonalizable", r.diagonalizable)?;
    d.set_item("real", r.is_real())?;
    d.set_item("max_abs_im", r.max_abs_im)?;
    d.set_item("max_abs_re", r.max_abs_re)?;
    Ok(d)
}

#[pyfunction]
fn quasi_hermiticity_residual(metric: Rows, op: Rows) -> PyResult<f64> {
    spectral::quasi_hermiticity_residual(&to_matrix(metric)?, &to_matrix(op)?).map_err(err)
}

/// Operator Schmidt decomposition of a bipartite operator.
#[pyclass(name = "SchmidtDecomposition", module = "quasilocal_py")]
struct PySchmidt {
    inner: schmidt::SchmidtDecomposition,
}

#[pymethods]
impl PySchmidt {
    #[new]
    #[pyo3(signature = (matrix, dim_a, dim_b, tol = SCHMIDT_TOL))]
    fn new(matrix: Rows, dim_a: usize, dim_b: usize, tol: f64) -> PyResult<Self> {
        let parts = Bipartition::new(dim_a, dim_b).map_err(err)?;
        let inner = schmidt::operator_schmidt(&to_matrix(matrix)?, parts, tol).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn schmidt_number(&self) -> usize {
        self.inner.schmidt_number
    }

    /// `χ_i = s_i²`, descending.
    #[getter]
    fn chi(&self) -> Vec<f64> {
        self.inner.coefficients.iter().map(|s| s * s).collect()
    }

    fn factors_a(&self) -> Vec<Rows> {
        self.inner.significant_a().iter().map(to_rows).collect()
    }

    fn factors_b(&self) -> Vec<Rows> {
        self.inner.significant_b().iter().map(to_rows).collect()
    }

    fn reconstruct(&self) -> Rows {
        to_rows(&self.inner.reconstruct())
    }

    /// Local-observable counts on each side and any bound violation.
    fn bounds<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let b = schmidt::schmidt_bounds_check(&self.inner).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("schmidt_number", b.schmidt_number)?;
        d.set_item("threshold", b.threshold)?;
        d.set_item("solutions_a", b.solutions_a)?;
        d.set_item("solutions_b", b.solutions_b)?;
        d.set_item("local_observables", b.local_observables())?;
        d.set_item("violation", b.violation)?;
        Ok(d)
    }
}

#[pyfunction]
fn build_eta_min(beta: f64) -> PyResult<Rows> {
    Ok(to_rows(&schmidt::build_eta_min(beta).map_err(err)?))
}

#[pyfunction]
fn build_eta_max(alpha: f64, dim_a: usize, dim_b: usize) -> PyResult<Rows> {
    Ok(to_rows(&schmidt::build_eta_max(alpha, dim_a, dim_b).map_err(err)?))
}

/// Basis of nontrivial `O_B` with `1_A ⊗ O_B` quasi-Hermitian.
#[pyfunction]
fn solve_local_b(eta: Rows, dim_a: usize, dim_b: usize) -> PyResult<Vec<Rows>> {
    let parts = Bipartition::new(dim_a, dim_b).map_err(err)?;
    let sols = schmidt::solve_local_b(&to_matrix(eta)?, parts).map_err(err)?;
    Ok(sols.iter().map(to_rows).collect())
}

#[pymodule]
fn quasilocal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", quasilocal::VERSION)?;
    m.add_class::<PyChainParams>()?;
    m.add_class::<PyReducedMetric>()?;
    m.add_class::<PyLocalityReport>()?;
    m.add_class::<PySchmidt>()?;
    m.add_function(wrap_pyfunction!(scan_subsystems, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_scan, m)?)?;
    m.add_function(wrap_pyfunction!(lift_metric, m)?)?;
    m.add_function(wrap_pyfunction!(eigen_report, m)?)?;
    m.add_function(wrap_pyfunction!(quasi_hermiticity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(build_eta_min, m)?)?;
    m.add_function(wrap_pyfunction!(build_eta_max, m)?)?;
    m.add_function(wrap_pyfunction!(solve_local_b, m)?)?;
    Ok(())
}
