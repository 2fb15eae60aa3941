//! Python bindings. Regions are passed as dicts in the JSON layout of run
//! configurations; records come back as dicts with infinite values spelled
//! `"inf"` / `"neg_inf"`.

use std::collections::BTreeMap;

use condldp::conditional::{self, DEFAULT_TILT_TOL};
use condldp::empirics::{self, EventSet, Method, SweepOptions};
use condldp::{ConditioningSet, Extended, LdpError, Region};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: LdpError) -> PyErr {
    match e {
        LdpError::InvalidParameter(_) | LdpError::DimensionMismatch { .. } | LdpError::Unsupported(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn region(obj: &Bound<'_, PyAny>) -> PyResult<Region> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("region: {e}")))
}

fn float(v: Extended) -> f64 {
    v.to_f64()
}

fn method(name: &str) -> PyResult<Method> {
    name.parse().map_err(err)
}

#[pyclass(name = "JointModel", frozen, skip_from_py_object)]
struct PyJointModel {
    inner: condldp::JointModel,
}

#[pymethods]
impl PyJointModel {
    #[new]
    #[pyo3(signature = (name, params = None))]
    fn new(name: &str, params: Option<BTreeMap<String, f64>>) -> PyResult<Self> {
        let inner = condldp::JointModel::from_spec(name, &params.unwrap_or_default()).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn x_dim(&self) -> usize {
        self.inner.x_dim()
    }

    #[getter]
    fn y_dim(&self) -> usize {
        self.inner.y_dim()
    }

    /// `Ψ(λ)` over the full `(x, y)` dual space.
    fn free_energy(&self, point: Vec<f64>) -> PyResult<f64> {
        self.check(&point)?;
        Ok(float(self.inner.free_energy().eval(&point)))
    }

    /// `I(x, y)`; `inf` off the effective domain.
    fn rate(&self, point: Vec<f64>) -> PyResult<f64> {
        self.check(&point)?;
        Ok(float(self.inner.rate_function().eval(&point)))
    }

    fn sample(&self, n: u64, seed: u64, count: usize) -> Vec<Vec<f64>> {
        self.inner
            .sample_batch(n, seed, count)
            .iter()
            .map(|d| d.coords().to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("JointModel({:?})", self.inner.kind())
    }
}

impl PyJointModel {
    fn check(&self, point: &[f64]) -> PyResult<()> {
        if point.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!(
                "expected {} coordinates, got {}",
                self.inner.dim(),
                point.len()
            )));
        }
        Ok(())
    }
}

/// Solves `∇ₓΨ(λ₀, 0) = x₀`.
#[pyfunction]
#[pyo3(signature = (model, x0, tol = DEFAULT_TILT_TOL))]
fn solve_tilt<'py>(py: Python<'py>, model: &PyJointModel, x0: Vec<f64>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let t = conditional::solve_tilt(&model.inner.free_energy(), &x0, tol).map_err(err)?;
    to_py(py, &t)
}

/// `I_B` at each point for the set built from the tilt at `x0`.
#[pyfunction]
#[pyo3(signature = (model, x0, points, delta = None))]
fn conditional_rate(model: &PyJointModel, x0: Vec<f64>, points: Vec<Vec<f64>>, delta: Option<f64>) -> PyResult<Vec<f64>> {
    let t = conditional::solve_tilt(&model.inner.free_energy(), &x0, DEFAULT_TILT_TOL).map_err(err)?;
    let b = conditional::build_conditioning_set(&t.lambda0, &t.x0, delta).map_err(err)?;
    let ib = conditional::conditional_rate(&model.inner.rate_function(), &b, Extended::Finite(t.min_rate)).map_err(err)?;
    points
        .iter()
        .map(|p| {
            model.check(p)?;
            Ok(float(ib.eval(p)))
        })
        .collect()
}

/// `I_{x₀}(y)` at each `y`.
#[pyfunction]
fn conditional_marginal_rate(model: &PyJointModel, x0: Vec<f64>, ys: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let psi = model.inner.free_energy();
    let rate = model.inner.rate_function();
    let t = conditional::solve_tilt(&psi, &x0, DEFAULT_TILT_TOL).map_err(err)?;
    let m = conditional::conditional_marginal_rate(&psi, &t, conditional::RateSource::ClosedForm(&rate)).map_err(err)?;
    Ok(ys.iter().map(|y| float(m.field.eval(y))).collect())
}

/// `Ψ_{x₀}(λ) = Ψ(λ₀, λ) − Ψ(λ₀, 0)` at each `λ`.
#[pyfunction]
fn conditional_free_energy(model: &PyJointModel, lambda0: Vec<f64>, lambdas: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
    let f = conditional::conditional_free_energy(&model.inner.free_energy(), &lambda0).map_err(err)?;
    Ok(lambdas.iter().map(|l| float(f.eval(l))).collect())
}

#[pyfunction]
#[pyo3(signature = (model, n, event, condition, method = "tilted", seed = 0, replicas = 10_000))]
#[allow(clippy::too_many_arguments)]
fn estimate_conditional_logprob<'py>(
    py: Python<'py>,
    model: &PyJointModel,
    n: u64,
    event: &Bound<'py, PyAny>,
    condition: &Bound<'py, PyAny>,
    method: &str,
    seed: u64,
    replicas: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let a = EventSet::new(region(event)?).map_err(err)?;
    let b = ConditioningSet::new(region(condition)?).map_err(err)?;
    let m = self::method(method)?;
    let e = py
        .detach(|| empirics::estimate_conditional_logprob(&model.inner, n, &a, &b, m, seed, replicas))
        .map_err(err)?;
    to_py(py, &e)
}

#[pyfunction]
#[pyo3(signature = (model, n, lambda0, seed = 0, replicas = 10_000))]
fn canonical_expectation<'py>(
    py: Python<'py>,
    model: &PyJointModel,
    n: u64,
    lambda0: Vec<f64>,
    seed: u64,
    replicas: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let c = py
        .detach(|| empirics::canonical_expectation(&model.inner, n, &lambda0, seed, replicas))
        .map_err(err)?;
    to_py(py, &c)
}

/// Sweep over `ns` with `B` built from the tilt at `x0`.
#[pyfunction]
#[pyo3(signature = (model, ns, event, x0, delta = None, method = "tilted", seed = 0, replicas = 10_000, epsilon = empirics::DEFAULT_EPSILON))]
#[allow(clippy::too_many_arguments)]
fn convergence_sweep<'py>(
    py: Python<'py>,
    model: &PyJointModel,
    ns: Vec<u64>,
    event: &Bound<'py, PyAny>,
    x0: Vec<f64>,
    delta: Option<f64>,
    method: &str,
    seed: u64,
    replicas: usize,
    epsilon: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let a = EventSet::new(region(event)?).map_err(err)?;
    let m = self::method(method)?;
    let t = conditional::solve_tilt(&model.inner.free_energy(), &x0, DEFAULT_TILT_TOL).map_err(err)?;
    let b = conditional::build_conditioning_set(&t.lambda0, &t.x0, delta).map_err(err)?;
    let options = SweepOptions {
        epsilon,
        ..SweepOptions::default()
    };
    let r = py
        .detach(|| empirics::convergence_sweep(&model.inner, &ns, &a, &b, m, seed, replicas, &options))
        .map_err(err)?;
    to_py(py, &r)
}

#[pymodule]
fn pycondldp(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyJointModel>()?;
    m.add_function(wrap_pyfunction!(solve_tilt, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_rate, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_marginal_rate, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_free_energy, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_conditional_logprob, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(convergence_sweep, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
