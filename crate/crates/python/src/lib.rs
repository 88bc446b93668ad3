//! Python bindings: a `Matrix` type plus the main analyses, each returning
//! plain dicts built from the same JSON the CLI emits.

use posinorm::app::{parse_weights, MatrixFile};
use posinorm::chains;
use posinorm::classes;
use posinorm::douglas;
use posinorm::gallery;
use posinorm::harness::{self, Suite};
use posinorm::numeric::{Complex64, ComplexMatrix, ToleranceContext};
use posinorm::shifts;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn tolerance(tol: Option<f64>) -> PyResult<ToleranceContext> {
    match tol {
        Some(t) => ToleranceContext::uniform(t).map_err(err),
        None => Ok(ToleranceContext::default()),
    }
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Dense complex matrix.
#[pyclass(name = "Matrix", module = "posinorm_py", frozen)]
pub struct PyMatrix {
    inner: ComplexMatrix,
}

#[pymethods]
impl PyMatrix {
    /// Builds a matrix from a list of rows of (complex or real) numbers.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(PyValueError::new_err("rows have different lengths"));
        }
        let inner = ComplexMatrix::from_row_major(r, c, rows.into_iter().flatten().collect())
            .map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(n),
        }
    }

    /// Parses the MatrixFile JSON format.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = MatrixFile::parse(text)
            .and_then(|f| f.to_matrix())
            .map_err(err)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        MatrixFile::from_matrix(&self.inner).to_canonical()
    }

    fn to_list(&self) -> Vec<Vec<Complex64>> {
        (0..self.inner.rows())
            .map(|i| {
                (0..self.inner.cols())
                    .map(|j| self.inner.get(i, j))
                    .collect()
            })
            .collect()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.rows(), self.inner.cols())
    }

    fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    fn __matmul__(&self, other: &PyMatrix) -> PyResult<Self> {
        if self.inner.cols() != other.inner.rows() {
            return Err(PyValueError::new_err("inner dimensions differ"));
        }
        Ok(Self {
            inner: &self.inner * &other.inner,
        })
    }

    fn __repr__(&self) -> String {
        format!("Matrix({}x{})", self.inner.rows(), self.inner.cols())
    }
}

#[pyfunction]
#[pyo3(signature = (t, tol=None))]
fn classify<'py>(py: Python<'py>, t: &PyMatrix, tol: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    let report = classes::classify(&t.inner, &tolerance(tol)?).map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (t, n_max=None, tol=None))]
fn chain_profile<'py>(
    py: Python<'py>,
    t: &PyMatrix,
    n_max: Option<usize>,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let n = n_max.unwrap_or(t.inner.rows());
    let profile = chains::chain_profile(&t.inner, &tolerance(tol)?, n).map_err(err)?;
    to_py(py, &profile)
}

/// Decides `R(A) ⊆ R(B)` and returns the minimal factor norm when it holds.
#[pyfunction]
#[pyo3(signature = (a, b, tol=None))]
fn range_included<'py>(
    py: Python<'py>,
    a: &PyMatrix,
    b: &PyMatrix,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let r = douglas::range_included(&a.inner, &b.inner, &tolerance(tol)?).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (m, n, tol=None))]
fn psd_domination_alpha<'py>(
    py: Python<'py>,
    m: &PyMatrix,
    n: &PyMatrix,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let d = douglas::psd_domination_alpha(&m.inner, &n.inner, &tolerance(tol)?).map_err(err)?;
    to_py(py, &d)
}

/// Window-ratio supremum for the `n`-th power of a weighted shift; `weights`
/// uses the CLI grammar (`recip`, `const:2`, `geom:0.5`, `list:1,2`, ...).
#[pyfunction]
#[pyo3(signature = (weights, n, horizon=10_000))]
fn shift_sup<'py>(
    py: Python<'py>,
    weights: &str,
    n: usize,
    horizon: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let w = parse_weights(weights).map_err(err)?;
    let v = shifts::shift_posinormal(&w, n, horizon).map_err(err)?;
    to_py(py, &v)
}

#[pyfunction]
#[pyo3(signature = (k_blocks, tol=None))]
fn blowup_report<'py>(
    py: Python<'py>,
    k_blocks: usize,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let r = gallery::blowup_report(k_blocks, &tolerance(tol)?).map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (suite, trials=100, dim=8, seed=0, tol=None))]
fn run_suite<'py>(
    py: Python<'py>,
    suite: &str,
    trials: usize,
    dim: usize,
    seed: u64,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let suite: Suite = suite.parse().map_err(err)?;
    let tol = tolerance(tol)?;
    let r = py
        .detach(|| harness::run_suite(suite, trials, dim, seed, &tol))
        .map_err(err)?;
    to_py(py, &r)
}

#[pymodule]
fn posinorm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatrix>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(chain_profile, m)?)?;
    m.add_function(wrap_pyfunction!(range_included, m)?)?;
    m.add_function(wrap_pyfunction!(psd_domination_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(shift_sup, m)?)?;
    m.add_function(wrap_pyfunction!(blowup_report, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
