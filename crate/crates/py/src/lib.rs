//! Python bindings: series, moment data, transforms, the c-free oracle,
//! CLT limits, the Fock model and the experiment runner.

use cfree_core::algebra::{AlgebraContext, AlgebraElement, SubalgebraKind};
use cfree_core::error::CfreeError;
use cfree_core::{clt, experiment, fock, mfs, moments, partitions, random, transforms};
use num_complex::Complex64 as C64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: CfreeError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py<'py>(py: Python<'py>, s: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (s,))
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    json_to_py(py, &serde_json::to_string(value).map_err(|e| err(e.into()))?)
}

fn element(rows: Vec<Vec<C64>>) -> PyResult<AlgebraElement> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("an algebra element must be a square matrix"));
    }
    AlgebraElement::from_entries(d, rows.concat()).map_err(err)
}

fn elements(args: Vec<Vec<Vec<C64>>>) -> PyResult<Vec<AlgebraElement>> {
    args.into_iter().map(element).collect()
}

fn rows(b: &AlgebraElement) -> Vec<Vec<C64>> {
    b.entries().chunks(b.d()).map(<[C64]>::to_vec).collect()
}

/// `B = M_d(C)` with the subalgebra `D` ("full", "diagonal" or "scalar").
#[pyclass(name = "Context", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyContext(AlgebraContext);

#[pymethods]
impl PyContext {
    #[new]
    #[pyo3(signature = (d, kind = "full"))]
    fn new(d: usize, kind: &str) -> PyResult<Self> {
        let kind: SubalgebraKind = kind.parse().map_err(err)?;
        AlgebraContext::new(d, kind).map(Self).map_err(err)
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    #[getter]
    fn kind(&self) -> String {
        self.0.kind().to_string()
    }

    fn __repr__(&self) -> String {
        format!("Context(d={}, kind={:?})", self.0.d(), self.0.kind().to_string())
    }
}

/// Truncated multilinear function series.
#[pyclass(name = "Series", frozen)]
struct PySeries(mfs::MultilinearSeries);

fn series(s: mfs::MultilinearSeries) -> PySeries {
    PySeries(s)
}

#[pymethods]
impl PySeries {
    #[staticmethod]
    fn zero(ctx: &PyContext, truncation: usize) -> Self {
        series(mfs::MultilinearSeries::zero(ctx.0, truncation))
    }

    #[staticmethod]
    fn identity(ctx: &PyContext, truncation: usize) -> Self {
        series(mfs::MultilinearSeries::identity(ctx.0, truncation))
    }

    #[staticmethod]
    fn one(ctx: &PyContext, truncation: usize) -> Self {
        series(mfs::MultilinearSeries::one(ctx.0, truncation))
    }

    /// Scalar series over `C`; component `n` is `c[n] b_1⋯b_n`.
    #[staticmethod]
    fn from_scalars(coefficients: Vec<C64>) -> PyResult<Self> {
        mfs::MultilinearSeries::from_scalars(&coefficients).map(series).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (ctx, truncation, seed, centered = false))]
    fn random(ctx: &PyContext, truncation: usize, seed: u64, centered: bool) -> Self {
        let shape = random::SeriesShape { centered, ..Default::default() };
        series(random::random_series(&mut random::seeded(seed), ctx.0, truncation, shape))
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        serde_json::from_str(s).map(series).map_err(|e| err(e.into()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| err(e.into()))
    }

    #[getter]
    fn truncation(&self) -> usize {
        self.0.truncation()
    }

    #[getter]
    fn ctx(&self) -> PyContext {
        PyContext(self.0.ctx())
    }

    /// Flat coefficient tensor of degree `n`.
    fn component(&self, n: usize) -> PyResult<Vec<C64>> {
        self.0.component(n).map(<[C64]>::to_vec).map_err(err)
    }

    /// `ω_n(b_1, …, b_n)` for `d × d` matrices given as nested lists.
    fn eval(&self, args: Vec<Vec<Vec<C64>>>) -> PyResult<Vec<Vec<C64>>> {
        self.0.eval(&elements(args)?).map(|b| rows(&b)).map_err(err)
    }

    fn __add__(&self, other: &PySeries) -> PyResult<Self> {
        self.0.add(&other.0).map(series).map_err(err)
    }

    fn __sub__(&self, other: &PySeries) -> PyResult<Self> {
        self.0.sub(&other.0).map(series).map_err(err)
    }

    fn __mul__(&self, other: &PySeries) -> PyResult<Self> {
        self.0.mul(&other.0).map(series).map_err(err)
    }

    fn scale(&self, c: C64) -> Self {
        series(self.0.scale(c))
    }

    fn compose(&self, inner: &PySeries) -> PyResult<Self> {
        self.0.compose(&inner.0).map(series).map_err(err)
    }

    fn mult_inverse(&self) -> PyResult<Self> {
        self.0.mult_inverse().map(series).map_err(err)
    }

    fn comp_inverse(&self) -> PyResult<Self> {
        self.0.comp_inverse().map(series).map_err(err)
    }

    fn max_deviation(&self, other: &PySeries) -> PyResult<f64> {
        self.0.max_deviation(&other.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Series(d={}, N={})", self.0.ctx().d(), self.0.truncation())
    }
}

/// Moment data of one generator: Ψ-series `m` and Φ-series `mfrak`.
#[pyclass(name = "MomentSpec", frozen)]
struct PyMomentSpec(moments::MomentSpec);

#[pymethods]
impl PyMomentSpec {
    #[new]
    fn new(label: String, m: &PySeries, mfrak: &PySeries) -> PyResult<Self> {
        moments::MomentSpec::new(label, m.0.clone(), mfrak.0.clone()).map(Self).map_err(err)
    }

    /// Scalar data: `psi[k] = ψ(X^(k+1))`, `phi[k] = φ(X^(k+1))`.
    #[staticmethod]
    fn scalar(label: String, psi: Vec<f64>, phi: Vec<f64>) -> PyResult<Self> {
        moments::MomentSpec::scalar(label, &psi, &phi).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (ctx, label, truncation, seed, centered = false))]
    fn random(ctx: &PyContext, label: String, truncation: usize, seed: u64, centered: bool) -> Self {
        Self(moments::MomentSpec::random(&mut random::seeded(seed), ctx.0, label, truncation, centered))
    }

    /// Moment data of a seeded Hermitian matrix model with inner dimension `m`.
    #[staticmethod]
    fn matrix_model(ctx: &PyContext, m: usize, seed: u64, truncation: usize) -> PyResult<Self> {
        moments::matrix_model_spec(ctx.0, m, seed, truncation).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_json(s: &str) -> PyResult<Self> {
        serde_json::from_str(s).map(Self).map_err(|e| err(e.into()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| err(e.into()))
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label.clone()
    }

    #[getter]
    fn m(&self) -> PySeries {
        series(self.0.m.clone())
    }

    #[getter]
    fn mfrak(&self) -> PySeries {
        series(self.0.mfrak.clone())
    }

    fn dilate(&self, lam: f64) -> PyResult<Self> {
        self.0.dilate(lam).map(Self).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("MomentSpec(label={:?}, N={})", self.0.label, self.0.truncation())
    }
}

fn which(name: &str) -> PyResult<moments::Expectation> {
    match name {
        "psi" => Ok(moments::Expectation::Psi),
        "phi" => Ok(moments::Expectation::Phi),
        _ => Err(PyValueError::new_err(format!("expected 'psi' or 'phi', got {name:?}"))),
    }
}

fn limit(name: &str) -> PyResult<clt::Limit> {
    match name {
        "nu" => Ok(clt::Limit::Nu),
        "mu" => Ok(clt::Limit::Mu),
        _ => Err(PyValueError::new_err(format!("expected 'nu' or 'mu', got {name:?}"))),
    }
}

fn specs(list: Vec<PyRef<'_, PyMomentSpec>>) -> Vec<moments::MomentSpec> {
    list.iter().map(|s| s.0.clone()).collect()
}

/// c-free product of a family of generators.
#[pyclass(name = "CFreeProduct", frozen)]
struct PyCFreeProduct(moments::CFreeProduct);

#[pymethods]
impl PyCFreeProduct {
    #[new]
    #[pyo3(signature = (family, word_cap = moments::DEFAULT_WORD_CAP))]
    fn new(family: Vec<PyRef<'_, PyMomentSpec>>, word_cap: usize) -> PyResult<Self> {
        moments::CFreeProduct::new(specs(family)).map(|p| Self(p.with_word_cap(word_cap))).map_err(err)
    }

    /// Expectation of a word given in its JSON form
    /// `{"coeffs": [...], "labels": [...]}`; `which` is "psi" or "phi".
    fn expectation(&self, word_json: &str, which_name: &str) -> PyResult<Vec<Vec<C64>>> {
        let w: moments::Word = serde_json::from_str(word_json).map_err(|e| err(e.into()))?;
        self.0.expectation(&w, which(which_name)?).map(|b| rows(&b)).map_err(err)
    }

    /// Expectation of the word `labels` with unit coefficients.
    fn labels_expectation(&self, labels: Vec<String>, which_name: &str) -> PyResult<Vec<Vec<C64>>> {
        let w = moments::Word::from_labels(self.0.ctx().d(), &labels);
        self.0.expectation(&w, which(which_name)?).map(|b| rows(&b)).map_err(err)
    }
}

#[pyfunction]
fn cr_from_moments(beta: &PySeries, gamma: &PySeries) -> PyResult<PySeries> {
    transforms::cr_from_moments(&beta.0, &gamma.0).map(series).map_err(err)
}

#[pyfunction]
fn cr_analytic(beta: &PySeries, gamma: &PySeries) -> PyResult<PySeries> {
    transforms::cr_analytic(&beta.0, &gamma.0).map(series).map_err(err)
}

#[pyfunction]
fn r_from_moments(gamma: &PySeries) -> PyResult<PySeries> {
    transforms::r_from_moments(&gamma.0).map(series).map_err(err)
}

#[pyfunction]
fn moments_from_cr(cr: &PySeries, gamma: &PySeries, truncation: usize) -> PyResult<PySeries> {
    transforms::moments_from_cr(&cr.0, &gamma.0, truncation).map(series).map_err(err)
}

#[pyfunction]
fn moments_from_r(r: &PySeries, truncation: usize) -> PyResult<PySeries> {
    transforms::moments_from_r(&r.0, truncation).map(series).map_err(err)
}

#[pyfunction]
fn cr_of(spec: &PyMomentSpec) -> PyResult<PySeries> {
    transforms::cr_of(&spec.0).map(series).map_err(err)
}

#[pyfunction]
fn r_of(spec: &PyMomentSpec) -> PyResult<PySeries> {
    transforms::r_of(&spec.0).map(series).map_err(err)
}

#[pyfunction]
fn sum_spec(x: &PyMomentSpec, y: &PyMomentSpec, truncation: usize) -> PyResult<PyMomentSpec> {
    moments::sum_spec(&x.0, &y.0, truncation).map(PyMomentSpec).map_err(err)
}

#[pyfunction]
fn additivity_check<'py>(
    py: Python<'py>,
    x: &PyMomentSpec,
    y: &PyMomentSpec,
    truncation: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &transforms::additivity_check(&x.0, &y.0, truncation, tol).map_err(err)?)
}

#[pyfunction]
fn resolve_r_closed_form<'py>(py: Python<'py>, alpha: &PySeries) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &transforms::resolve_r_closed_form(&alpha.0, 1e-8, 1e-3).map_err(err)?)
}

/// `"nu"` or `"mu"` limit moment `E(s b_1 s ⋯ b_n s)`.
#[pyfunction]
fn limit_moment(spec: &PyMomentSpec, which_limit: &str, args: Vec<Vec<Vec<C64>>>) -> PyResult<Vec<Vec<C64>>> {
    clt::limit_moment(&spec.0, limit(which_limit)?, &elements(args)?).map(|b| rows(&b)).map_err(err)
}

#[pyfunction]
fn limit_series(spec: &PyMomentSpec, which_limit: &str, truncation: usize) -> PyResult<PySeries> {
    clt::limit_series(&spec.0, limit(which_limit)?, truncation).map(series).map_err(err)
}

#[pyfunction]
fn nc_pairings(n: usize) -> Vec<Vec<Vec<usize>>> {
    partitions::enumerate_nc_pairings(n).into_iter().map(|p| p.blocks().to_vec()).collect()
}

#[pyfunction]
fn catalan(k: usize) -> u64 {
    partitions::catalan(k)
}

/// Fock-model expectation of `ξ^n` for the scalar covariance `η = c`.
#[pyfunction]
fn fock_scalar_moment(c: f64, n: usize) -> PyResult<f64> {
    let eta = fock::CovarianceForm::scalar(c);
    fock::fock_expectation(&eta, &fock::Polynomial::power(1, n), n).map(|v| v.get(0, 0).re).map_err(err)
}

/// Fock-model expectation of a polynomial (JSON list of monomials) with
/// `η(a, b) = Φ(X a* b X)` read from `spec`.
#[pyfunction]
fn fock_expectation(spec: &PyMomentSpec, polynomial_json: &str) -> PyResult<Vec<Vec<C64>>> {
    let eta = fock::CovarianceForm::phi_of(&spec.0).map_err(err)?;
    let p: fock::Polynomial = serde_json::from_str(polynomial_json).map_err(|e| err(e.into()))?;
    fock::fock_expectation(&eta, &p, p.degree()).map(|b| rows(&b)).map_err(err)
}

/// Runs one suite; `config` is a dict with the `ExperimentConfig` fields.
#[pyfunction]
fn run_experiment<'py>(py: Python<'py>, config: Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let text: String = py.import("json")?.call_method1("dumps", (config,))?.extract()?;
    let config: experiment::ExperimentConfig = serde_json::from_str(&text).map_err(|e| err(e.into()))?;
    to_py(py, &experiment::run_experiment(&config).map_err(err)?)
}

#[pyfunction]
fn schema(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &experiment::schemas())
}

#[pymodule]
fn cfree(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyContext>()?;
    m.add_class::<PySeries>()?;
    m.add_class::<PyMomentSpec>()?;
    m.add_class::<PyCFreeProduct>()?;
    m.add_function(wrap_pyfunction!(cr_from_moments, m)?)?;
    m.add_function(wrap_pyfunction!(cr_analytic, m)?)?;
    m.add_function(wrap_pyfunction!(r_from_moments, m)?)?;
    m.add_function(wrap_pyfunction!(moments_from_cr, m)?)?;
    m.add_function(wrap_pyfunction!(moments_from_r, m)?)?;
    m.add_function(wrap_pyfunction!(cr_of, m)?)?;
    m.add_function(wrap_pyfunction!(r_of, m)?)?;
    m.add_function(wrap_pyfunction!(sum_spec, m)?)?;
    m.add_function(wrap_pyfunction!(additivity_check, m)?)?;
    m.add_function(wrap_pyfunction!(resolve_r_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(limit_moment, m)?)?;
    m.add_function(wrap_pyfunction!(limit_series, m)?)?;
    m.add_function(wrap_pyfunction!(nc_pairings, m)?)?;
    m.add_function(wrap_pyfunction!(catalan, m)?)?;
    m.add_function(wrap_pyfunction!(fock_scalar_moment, m)?)?;
    m.add_function(wrap_pyfunction!(fock_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(schema, m)?)?;
    Ok(())
}
