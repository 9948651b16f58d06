//! Python bindings: a `Matrix` type, a `Context` for tolerances, and thin
//! wrappers over the inverses, relations, route table and conformance suite.
//! Structured results come back as plain dicts.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wwg_core::conformance::{run_suite_with_jobs, GeneratorSpec};
use wwg_core::ginverse::{self, commutation_analysis, wwg_representations};
use wwg_core::relations::{wg_below, wwg_below, Side};
use wwg_core::{numeric, spectral, ComplexMatrix, MatrixDocument, MatrixFormat, NumericContext};

fn to_py(e: wwg_core::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

/// Round-trips a serializable value through JSON into Python objects.
fn to_object<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pyclass(module = "wwg", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Matrix {
    inner: ComplexMatrix,
}

impl From<ComplexMatrix> for Matrix {
    fn from(inner: ComplexMatrix) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl Matrix {
    /// Builds a matrix from a non-empty list of equally long rows of
    /// real or complex numbers.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(PyValueError::new_err("matrix must be at least 1x1"));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(PyValueError::new_err("rows have different lengths"));
        }
        let m = ComplexMatrix::from_row_major(r, c, rows.into_iter().flatten().collect()).map_err(to_py)?;
        Ok(m.into())
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        ComplexMatrix::identity(n).into()
    }

    /// Parses JSON or Matrix Market text; the format is detected from the
    /// header.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let format = MatrixFormat::sniff(text.as_bytes());
        let doc = MatrixDocument::parse(text.as_bytes(), format).map_err(to_py)?;
        Ok(doc.matrix.into())
    }

    /// Serializes as `"json"` or `"mm"` (Matrix Market).
    #[pyo3(signature = (format = "json"))]
    fn dumps(&self, format: &str) -> PyResult<String> {
        let format = match format {
            "json" => MatrixFormat::Json,
            "mm" => MatrixFormat::MatrixMarket,
            other => return Err(PyValueError::new_err(format!("unknown format {other:?}"))),
        };
        Ok(MatrixDocument::new(self.inner.clone()).serialize(format))
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    fn tolist(&self) -> Vec<Vec<Complex64>> {
        let (r, c) = self.inner.shape();
        (0..r).map(|i| (0..c).map(|j| self.inner.get(i, j)).collect()).collect()
    }

    fn adjoint(&self) -> Self {
        self.inner.adjoint().into()
    }

    fn norm(&self) -> f64 {
        self.inner.frobenius_norm()
    }

    fn __matmul__(&self, other: &Matrix) -> PyResult<Self> {
        if self.inner.cols() != other.inner.rows() {
            return Err(PyValueError::new_err("inner dimensions differ"));
        }
        Ok((&self.inner * &other.inner).into())
    }

    fn __sub__(&self, other: &Matrix) -> PyResult<Self> {
        if self.inner.shape() != other.inner.shape() {
            return Err(PyValueError::new_err("shapes differ"));
        }
        Ok((&self.inner - &other.inner).into())
    }

    fn __getitem__(&self, key: (usize, usize)) -> PyResult<Complex64> {
        let (i, j) = key;
        let (r, c) = self.inner.shape();
        if i >= r || j >= c {
            return Err(pyo3::exceptions::PyIndexError::new_err("index out of range"));
        }
        Ok(self.inner.get(i, j))
    }

    fn __repr__(&self) -> String {
        let rows: Vec<String> = self
            .tolist()
            .iter()
            .map(|row| {
                let cells: Vec<String> = row.iter().map(|z| format!("({}{:+}j)", z.re, z.im)).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        format!("Matrix([{}])", rows.join(", "))
    }
}

/// Tolerances for rank decisions and identity checks.
#[pyclass(module = "wwg", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct Context {
    inner: NumericContext,
}

#[pymethods]
impl Context {
    #[new]
    #[pyo3(signature = (eq_rtol = None, rank_rtol = None))]
    fn new(eq_rtol: Option<f64>, rank_rtol: Option<f64>) -> PyResult<Self> {
        let mut inner = NumericContext::default();
        if let Some(t) = eq_rtol {
            inner = inner.with_eq_rtol(t);
        }
        if let Some(t) = rank_rtol {
            inner = inner.with_rank_rtol(t);
        }
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn eq_rtol(&self) -> f64 {
        self.inner.eq_rtol
    }

    #[getter]
    fn rank_rtol(&self) -> Option<f64> {
        self.inner.rank_rtol
    }
}

fn ctx_of(ctx: Option<&Context>) -> NumericContext {
    ctx.map_or_else(NumericContext::default, |c| c.inner)
}

macro_rules! unary {
    ($name:ident, $f:path, $doc:literal) => {
        #[doc = $doc]
        #[pyfunction]
        #[pyo3(signature = (a, ctx = None))]
        fn $name(a: &Matrix, ctx: Option<&Context>) -> PyResult<Matrix> {
            $f(&a.inner, &ctx_of(ctx)).map(Matrix::from).map_err(to_py)
        }
    };
}

macro_rules! weighted {
    ($name:ident, $f:path, $doc:literal) => {
        #[doc = $doc]
        #[pyfunction]
        #[pyo3(signature = (a, w, ctx = None))]
        fn $name(a: &Matrix, w: &Matrix, ctx: Option<&Context>) -> PyResult<Matrix> {
            $f(&a.inner, &w.inner, &ctx_of(ctx)).map(Matrix::from).map_err(to_py)
        }
    };
}

unary!(drazin, spectral::drazin, "Drazin inverse of a square matrix.");
unary!(group_inverse, ginverse::group_inverse, "Group inverse; fails above index 1.");
unary!(core_inverse, ginverse::core_inverse, "Core inverse; fails above index 1.");
unary!(core_ep, ginverse::core_ep, "Core-EP inverse.");
unary!(weak_group, ginverse::weak_group, "Weak group inverse.");
weighted!(w_drazin, spectral::w_drazin, "W-weighted Drazin inverse of an m x n `A` with n x m `W`.");
weighted!(weighted_core_ep, ginverse::weighted_core_ep, "W-weighted core-EP inverse.");
weighted!(weighted_weak_group, ginverse::weighted_weak_group, "W-weighted weak group inverse.");

#[pyfunction]
#[pyo3(signature = (a, ctx = None))]
fn moore_penrose(a: &Matrix, ctx: Option<&Context>) -> Matrix {
    numeric::moore_penrose(&a.inner, &ctx_of(ctx)).into()
}

/// `(index, stable_rank)` of a square matrix.
#[pyfunction]
#[pyo3(signature = (a, ctx = None))]
fn index(a: &Matrix, ctx: Option<&Context>) -> PyResult<(usize, usize)> {
    let r = spectral::index(&a.inner, &ctx_of(ctx)).map_err(to_py)?;
    Ok((r.index, r.stable_rank))
}

/// The weighted weak group inverse by every route: a dict from route tag to
/// matrix.
#[pyfunction]
#[pyo3(signature = (a, w, ctx = None))]
fn routes<'py>(py: Python<'py>, a: &Matrix, w: &Matrix, ctx: Option<&Context>) -> PyResult<Bound<'py, PyDict>> {
    let table = wwg_representations(&a.inner, &w.inner, &ctx_of(ctx)).map_err(to_py)?;
    let out = PyDict::new(py);
    for (route, m) in table.entries {
        out.set_item(route.tag(), Matrix::from(m))?;
    }
    Ok(out)
}

/// The commutation conditions of the weighted weak group inverse.
#[pyfunction]
#[pyo3(signature = (a, w, ctx = None))]
fn commutation(py: Python<'_>, a: &Matrix, w: &Matrix, ctx: Option<&Context>) -> PyResult<Py<PyAny>> {
    let report = commutation_analysis(&a.inner, &w.inner, &ctx_of(ctx)).map_err(to_py)?;
    to_object(py, &report)
}

/// Tests `A` below `B`. Without `w` this is the weak group relation; with
/// `w`, `side` picks `"right"`, `"left"` or `"both"`.
#[pyfunction]
#[pyo3(signature = (a, b, w = None, side = "right", ctx = None))]
fn relation(
    py: Python<'_>,
    a: &Matrix,
    b: &Matrix,
    w: Option<&Matrix>,
    side: &str,
    ctx: Option<&Context>,
) -> PyResult<Py<PyAny>> {
    let ctx = ctx_of(ctx);
    let verdict = match w {
        None => wg_below(&a.inner, &b.inner, &ctx),
        Some(w) => {
            let side = match side {
                "right" => Side::Right,
                "left" => Side::Left,
                "both" => Side::Both,
                other => return Err(PyValueError::new_err(format!("unknown side {other:?}"))),
            };
            wwg_below(&a.inner, &w.inner, &b.inner, &ctx, side)
        }
    }
    .map_err(to_py)?;
    to_object(py, &verdict)
}

/// Runs the randomized conformance suite over the mixed corpus and returns
/// the report as a dict.
#[pyfunction]
#[pyo3(signature = (trials = 200, seed = 0, jobs = 1, ctx = None))]
fn conform(py: Python<'_>, trials: usize, seed: u64, jobs: usize, ctx: Option<&Context>) -> PyResult<Py<PyAny>> {
    let ctx = ctx_of(ctx);
    let specs = GeneratorSpec::mixed_corpus();
    let report = py
        .detach(|| run_suite_with_jobs(&specs, trials, seed, &ctx, jobs))
        .map_err(to_py)?;
    to_object(py, &report)
}

#[pymodule]
fn wwg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Matrix>()?;
    m.add_class::<Context>()?;
    m.add_function(wrap_pyfunction!(drazin, m)?)?;
    m.add_function(wrap_pyfunction!(group_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(core_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(core_ep, m)?)?;
    m.add_function(wrap_pyfunction!(weak_group, m)?)?;
    m.add_function(wrap_pyfunction!(w_drazin, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_core_ep, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_weak_group, m)?)?;
    m.add_function(wrap_pyfunction!(moore_penrose, m)?)?;
    m.add_function(wrap_pyfunction!(index, m)?)?;
    m.add_function(wrap_pyfunction!(routes, m)?)?;
    m.add_function(wrap_pyfunction!(commutation, m)?)?;
    m.add_function(wrap_pyfunction!(relation, m)?)?;
    m.add_function(wrap_pyfunction!(conform, m)?)?;
    Ok(())
}
