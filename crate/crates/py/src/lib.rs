//! Python bindings. Reports come back as plain dicts; sequences as lists of `complex`.

use alh::experiments::{asymptotics_run, closeness_run, support_spread_run};
use alh::flows::{al_explicit_rhs, al_system_rhs};
use alh::hierarchy::{al_r_rhs, check_constraint, homogeneous_coeffs, recursion_residual, Sign};
use alh::integrator::{convergence_report, evolve, flow_for, EvolveOptions};
use alh::lattice::{weighted_norm, BoundaryMode, LatticeWindow, NormExponent, Profile, SequencePair, Weight, WeightRule};
use alh::lax::{build_l, eigenvalue_drift, lax_residual, spectrum, zc_residual};
use alh::FlowSpec;
use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn err(e: alh::Error) -> PyErr {
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_json<T: serde::de::DeserializeOwned>(what: &str, text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(format!("{what}: {e}")))
}

fn boundary(mode: &str, band: Option<usize>) -> PyResult<BoundaryMode> {
    match (mode, band) {
        ("pad_zero", None) => Ok(BoundaryMode::PadZero),
        ("periodic", None) => Ok(BoundaryMode::Periodic),
        ("frozen_edges", b) => Ok(BoundaryMode::FrozenEdges { band: b.unwrap_or(2) }),
        _ => Err(PyValueError::new_err(format!(
            "boundary must be pad_zero, periodic or frozen_edges (band only for frozen_edges), got {mode:?}"
        ))),
    }
}

fn norm_exponent(p: Option<f64>) -> PyResult<NormExponent> {
    match p {
        None => Ok(NormExponent::Infinity),
        Some(p) if p.is_infinite() => Ok(NormExponent::Infinity),
        Some(p) => NormExponent::finite(p).map_err(err),
    }
}

/// Finite window `n_min..=n_max` with a boundary rule.
#[pyclass(name = "Window", frozen, from_py_object)]
#[derive(Clone)]
struct PyWindow(LatticeWindow);

#[pymethods]
impl PyWindow {
    #[new]
    #[pyo3(signature = (n_min, n_max, boundary="pad_zero", band=None))]
    fn new(n_min: i64, n_max: i64, boundary: &str, band: Option<usize>) -> PyResult<Self> {
        let mode = self::boundary(boundary, band)?;
        LatticeWindow::new(n_min, n_max, mode).map(Self).map_err(err)
    }

    #[getter]
    fn n_min(&self) -> i64 {
        self.0.n_min()
    }

    #[getter]
    fn n_max(&self) -> i64 {
        self.0.n_max()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    #[getter]
    fn boundary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.boundary())
    }

    fn __repr__(&self) -> String {
        format!("Window({}, {}, {:?})", self.0.n_min(), self.0.n_max(), self.0.boundary())
    }
}

/// The pair `(alpha, beta)` on a window.
#[pyclass(name = "Pair", frozen, from_py_object)]
#[derive(Clone)]
struct PyPair(SequencePair);

#[pymethods]
impl PyPair {
    #[new]
    fn new(window: &PyWindow, alpha: Vec<Complex64>, beta: Vec<Complex64>) -> PyResult<Self> {
        SequencePair::new(window.0, alpha, beta).map(Self).map_err(err)
    }

    /// Builds a pair from a profile dict such as `{"kind": "gaussian", "a": [0.3, 0], "b": [0.3, 0], "width": 10}`.
    #[staticmethod]
    fn from_profile(window: &PyWindow, profile: &Bound<'_, PyDict>) -> PyResult<Self> {
        let text: String = profile.py().import("json")?.call_method1("dumps", (profile,))?.extract()?;
        let profile: Profile = from_json("profile", &text)?;
        profile.build(window.0).map(Self).map_err(err)
    }

    #[getter]
    fn window(&self) -> PyWindow {
        PyWindow(*self.0.window())
    }

    #[getter]
    fn alpha(&self) -> Vec<Complex64> {
        self.0.alpha().to_vec()
    }

    #[getter]
    fn beta(&self) -> Vec<Complex64> {
        self.0.beta().to_vec()
    }

    #[getter]
    fn sites(&self) -> Vec<i64> {
        self.0.window().sites().collect()
    }

    fn sup_norm(&self) -> f64 {
        self.0.sup_norm()
    }

    fn max_abs_diff(&self, other: &PyPair) -> PyResult<f64> {
        self.0.max_abs_diff(&other.0).map_err(err)
    }

    /// Weighted norm with `w(n) = 1 + |n|` (or uniform) and exponent `p` (None for the sup norm).
    #[pyo3(signature = (p=None, uniform=false))]
    fn weighted_norm(&self, p: Option<f64>, uniform: bool) -> PyResult<f64> {
        let rule = if uniform { WeightRule::Uniform } else { WeightRule::OnePlusAbs };
        let w = Weight::new(*self.0.window(), rule).map_err(err)?;
        weighted_norm(&self.0, &w, norm_exponent(p)?).map_err(err)
    }

    fn product_report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.0.product_report())
    }

    fn __repr__(&self) -> String {
        format!("Pair(window=[{}, {}], sup_norm={:e})", self.0.window().n_min(), self.0.window().n_max(), self.0.sup_norm())
    }
}

/// Flow of the hierarchy with constants `c_minus[0..=r_-]`, `c_plus[0..=r_+]`.
#[pyclass(name = "Flow", frozen, from_py_object)]
#[derive(Clone)]
struct PyFlow(FlowSpec);

#[pymethods]
impl PyFlow {
    #[new]
    fn new(c_minus: Vec<Complex64>, c_plus: Vec<Complex64>) -> PyResult<Self> {
        FlowSpec::new(c_minus, c_plus).map(Self).map_err(err)
    }

    /// `al_system`, `dnls_1`, `dnls_2` or `schur`.
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        FlowSpec::preset(name)
            .map(Self)
            .ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}")))
    }

    #[getter]
    fn r_minus(&self) -> usize {
        self.0.r_minus()
    }

    #[getter]
    fn r_plus(&self) -> usize {
        self.0.r_plus()
    }

    #[getter]
    fn c_minus(&self) -> Vec<Complex64> {
        self.0.c_minus().to_vec()
    }

    #[getter]
    fn c_plus(&self) -> Vec<Complex64> {
        self.0.c_plus().to_vec()
    }

    fn constraint<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &check_constraint(&self.0))
    }

    fn __repr__(&self) -> String {
        format!("Flow(c_minus={:?}, c_plus={:?})", self.0.c_minus(), self.0.c_plus())
    }
}

/// Right-hand side `(dalpha, dbeta)` from the recursion.
#[pyfunction]
fn rhs(pair: &PyPair, flow: &PyFlow) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
    let d = al_r_rhs(&pair.0, &flow.0).map_err(err)?;
    Ok((d.dalpha, d.dbeta))
}

/// Closed-form right-hand side; only r = (0,0), (1,1), (2,2).
#[pyfunction]
fn explicit_rhs(pair: &PyPair, flow: &PyFlow) -> PyResult<(Vec<Complex64>, Vec<Complex64>)> {
    let d = al_explicit_rhs(&pair.0, &flow.0).map_err(err)?;
    Ok((d.dalpha, d.dbeta))
}

/// Homogeneous ladder `{"f": [...], "g": [...], "h": [...]}` per level, plus the recursion residual.
#[pyfunction]
fn ladder<'py>(py: Python<'py>, pair: &PyPair, order: usize, sign: &str) -> PyResult<Bound<'py, PyDict>> {
    let sign = match sign {
        "+" | "plus" => Sign::Plus,
        "-" | "minus" => Sign::Minus,
        _ => return Err(PyValueError::new_err("sign must be 'plus' or 'minus'")),
    };
    let l = homogeneous_coeffs(&pair.0, order, sign).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("f", (0..order).map(|k| l.f_level(k)).collect::<Vec<_>>())?;
    d.set_item("g", (0..=order).map(|k| l.g_level(k)).collect::<Vec<_>>())?;
    d.set_item("h", (0..order).map(|k| l.h_level(k)).collect::<Vec<_>>())?;
    d.set_item("recursion_residual", recursion_residual(&pair.0, &l))?;
    Ok(d)
}

/// Zero-curvature defect of the AL system at site `n` for spectral parameter `z`.
#[pyfunction]
fn zero_curvature_residual(pair: &PyPair, z: Complex64, n: i64) -> PyResult<f64> {
    zc_residual(&pair.0, &al_system_rhs(&pair.0), z, n).map_err(err)
}

/// RK4 from 0 to `t1`; returns `(times, states)` sampled every `sample_every` steps.
#[pyfunction]
#[pyo3(signature = (pair, flow, t1, h, sample_every=1))]
fn integrate(pair: &PyPair, flow: &PyFlow, t1: f64, h: f64, sample_every: usize) -> PyResult<(Vec<f64>, Vec<PyPair>)> {
    let options = EvolveOptions {
        sample_every,
        ..Default::default()
    };
    let traj = evolve(&pair.0, &*flow_for(&flow.0), 0.0, t1, h, &options).map_err(err)?;
    Ok((traj.times, traj.states.into_iter().map(PyPair).collect()))
}

/// Step-halving study at `t1` over the decreasing step list `hs`.
#[pyfunction]
fn convergence<'py>(py: Python<'py>, pair: &PyPair, flow: &PyFlow, t1: f64, hs: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let r = convergence_report(&pair.0, &*flow_for(&flow.0), t1, &hs, None).map_err(err)?;
    to_py(py, &r)
}

/// Eigenvalues of the Lax operator on a periodic window.
#[pyfunction]
fn lax_spectrum(pair: &PyPair) -> PyResult<Vec<Complex64>> {
    spectrum(&build_l(&pair.0).map_err(err)?).map_err(err)
}

/// `max |dL/dt - [P, L]|` for the AL system, away from the window edges.
#[pyfunction]
#[pyo3(signature = (pair, margin=8))]
fn lax_pair_residual(pair: &PyPair, margin: usize) -> PyResult<f64> {
    let d = al_system_rhs(&pair.0);
    let bundle = build_l(&pair.0).map_err(err)?;
    lax_residual(&pair.0, &d, &bundle, margin).map_err(err)
}

/// Optimal-matching distance between two spectra.
#[pyfunction]
fn spectral_drift(before: Vec<Complex64>, after: Vec<Complex64>) -> PyResult<f64> {
    eigenvalue_drift(&before, &after).map_err(err)
}

/// Weighted distance between two evolving solutions and its fitted Gronwall envelope.
#[pyfunction]
#[pyo3(signature = (a, b, flow, t1, h, p=None, samples=200))]
fn closeness<'py>(
    py: Python<'py>,
    a: &PyPair,
    b: &PyPair,
    flow: &PyFlow,
    t1: f64,
    h: f64,
    p: Option<f64>,
    samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let w = Weight::new(*a.0.window(), WeightRule::OnePlusAbs).map_err(err)?;
    let r = closeness_run(&a.0, &b.0, &w, norm_exponent(p)?, &*flow_for(&flow.0), t1, h, samples).map_err(err)?;
    to_py(py, &r)
}

/// Residual of the power-tail ansatz `a/n^delta`, `b/n^delta` on each window size.
#[pyfunction]
#[pyo3(signature = (a, b, delta, flow, t1, h, windows=vec![201, 401], p=None, samples=100))]
#[allow(clippy::too_many_arguments)]
fn asymptotics<'py>(
    py: Python<'py>,
    a: Complex64,
    b: Complex64,
    delta: f64,
    flow: &PyFlow,
    t1: f64,
    h: f64,
    windows: Vec<usize>,
    p: Option<f64>,
    samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let r = asymptotics_run(a, b, delta, &flow.0, t1, h, &windows, norm_exponent(p)?, samples).map_err(err)?;
    to_py(py, &r)
}

/// One step from compactly supported data: how far the support grows.
#[pyfunction]
fn support_spread<'py>(py: Python<'py>, pair: &PyPair, flow: &PyFlow, h: f64) -> PyResult<Bound<'py, PyAny>> {
    let r = support_spread_run(&pair.0, &*flow_for(&flow.0), h).map_err(err)?;
    to_py(py, &r)
}

/// Runs all eleven acceptance criteria.
#[pyfunction]
#[pyo3(signature = (seed=2024))]
fn run_suite<'py>(py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| alh::suite::run_suite(seed));
    to_py(py, &report)
}

#[pymodule]
fn pyalh(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWindow>()?;
    m.add_class::<PyPair>()?;
    m.add_class::<PyFlow>()?;
    m.add_function(wrap_pyfunction!(rhs, m)?)?;
    m.add_function(wrap_pyfunction!(explicit_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(ladder, m)?)?;
    m.add_function(wrap_pyfunction!(zero_curvature_residual, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(lax_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(lax_pair_residual, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_drift, m)?)?;
    m.add_function(wrap_pyfunction!(closeness, m)?)?;
    m.add_function(wrap_pyfunction!(asymptotics, m)?)?;
    m.add_function(wrap_pyfunction!(support_spread, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
