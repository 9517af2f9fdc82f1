//! Python bindings: `import laguerre`.

use laguerre_core::sweep::{sweep_csv as core_sweep_csv, ConfigFile};
use laguerre_core::{BoundResult, ChannelParams, NoiseTracking, PowerConstraints};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: laguerre_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(lam: f64) -> PyResult<ChannelParams> {
    ChannelParams::new(lam).map_err(err)
}

fn constraints(peak: Option<f64>, average: Option<f64>) -> PyResult<PowerConstraints> {
    PowerConstraints::new(peak, average).map_err(err)
}

fn tracking(realized_noise: bool) -> NoiseTracking {
    if realized_noise {
        NoiseTracking::Realized
    } else {
        NoiseTracking::Cap
    }
}

/// Truncated output distribution for one input intensity.
#[pyclass(name = "PmfRow", frozen)]
struct PyPmfRow(laguerre_core::PmfRow);

#[pymethods]
impl PyPmfRow {
    #[getter]
    fn x(&self) -> f64 {
        self.0.x
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.0.lambda
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.0.probs.clone()
    }

    /// Mass beyond the last listed count.
    #[getter]
    fn tail_mass(&self) -> f64 {
        self.0.tail_mass
    }

    fn total(&self) -> f64 {
        self.0.total()
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn variance(&self) -> f64 {
        self.0.variance()
    }

    fn entropy(&self) -> f64 {
        self.0.entropy()
    }

    fn __len__(&self) -> usize {
        self.0.probs.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "PmfRow(x={}, lam={}, y_max={})",
            self.0.x,
            self.0.lambda,
            self.0.y_max()
        )
    }
}

/// A capacity bound in nats per channel use.
#[pyclass(name = "Bound", frozen)]
struct PyBound(BoundResult);

#[pymethods]
impl PyBound {
    #[getter]
    fn value(&self) -> f64 {
        self.0.value
    }

    #[getter]
    fn regime(&self) -> &'static str {
        self.0.regime.as_str()
    }

    #[getter]
    fn mu(&self) -> Option<f64> {
        self.0.mu
    }

    /// True when the bound only holds as the power grows.
    #[getter]
    fn asymptotic(&self) -> bool {
        self.0.asymptotic
    }

    fn __repr__(&self) -> String {
        format!("Bound(value={}, regime={})", self.0.value, self.0.regime.as_str())
    }
}

#[pyfunction]
#[pyo3(signature = (x, lam, tail_tol = 1e-12))]
fn pmf_row(x: f64, lam: f64, tail_tol: f64) -> PyResult<PyPmfRow> {
    laguerre_core::pmf_row(x, params(lam)?, tail_tol)
        .map(PyPmfRow)
        .map_err(err)
}

#[pyfunction]
fn log_pmf(y: u64, x: f64, lam: f64) -> PyResult<f64> {
    laguerre_core::log_pmf(y, x, params(lam)?).map_err(err)
}

/// `(mean, variance)` of the output count.
#[pyfunction]
fn moments(x: f64, lam: f64) -> PyResult<(f64, f64)> {
    laguerre_core::moments(x, params(lam)?).map_err(err)
}

#[pyfunction]
fn sample(x: f64, lam: f64, n: usize, seed: u64) -> PyResult<Vec<u64>> {
    laguerre_core::sample(x, params(lam)?, n, seed).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (peak = None, average = None, lam = 0.0))]
fn lower_bound(peak: Option<f64>, average: Option<f64>, lam: f64) -> PyResult<PyBound> {
    laguerre_core::lower_bound(&constraints(peak, average)?, params(lam)?)
        .map(PyBound)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (peak = None, average = None))]
fn upper_bound(peak: Option<f64>, average: Option<f64>) -> PyResult<PyBound> {
    laguerre_core::upper_bound(&constraints(peak, average)?)
        .map(PyBound)
        .map_err(err)
}

/// Per-user CDMA bound and the optimising alpha (None without a peak).
#[pyfunction]
#[pyo3(signature = (users, chips, peak = None, average = None, realized_noise = false))]
fn cdma_lower_bound(
    users: u32,
    chips: u32,
    peak: Option<f64>,
    average: Option<f64>,
    realized_noise: bool,
) -> PyResult<(PyBound, Option<f64>)> {
    let b = laguerre_core::cdma_lower_bound(&constraints(peak, average)?, users, chips, tracking(realized_noise))
        .map_err(err)?;
    Ok((PyBound(b.bound), b.alpha))
}

#[pyfunction]
#[pyo3(signature = (users, chips, peak, average = None, realized_noise = false))]
fn alpha_star(users: u32, chips: u32, peak: f64, average: Option<f64>, realized_noise: bool) -> PyResult<f64> {
    laguerre_core::alpha_star(
        &constraints(Some(peak), average)?,
        users,
        chips,
        tracking(realized_noise),
    )
    .map_err(err)
}

/// `(sum, per_user)` for `users` users under the same constraints.
#[pyfunction]
#[pyo3(signature = (users, chips, peak = None, average = None, realized_noise = false))]
fn sum_capacity(
    users: u32,
    chips: u32,
    peak: Option<f64>,
    average: Option<f64>,
    realized_noise: bool,
) -> PyResult<(f64, f64)> {
    let p = laguerre_core::sum_capacity(&constraints(peak, average)?, users, chips, tracking(realized_noise))
        .map_err(err)?;
    Ok((p.value, p.per_user))
}

#[pyfunction]
#[pyo3(signature = (chips, max_users, peak = None, average = None, realized_noise = false))]
fn optimal_users(
    chips: u32,
    max_users: u32,
    peak: Option<f64>,
    average: Option<f64>,
    realized_noise: bool,
) -> PyResult<u32> {
    laguerre_core::optimal_users(&constraints(peak, average)?, chips, max_users, tracking(realized_noise)).map_err(err)
}

/// CSV for a JSON config with `run` and `sweep` sections.
#[pyfunction]
fn sweep_csv(config_json: &str) -> PyResult<String> {
    let cfg = ConfigFile::from_json(config_json).map_err(err)?;
    let spec = cfg
        .sweep
        .ok_or_else(|| PyValueError::new_err("config has no sweep section"))?;
    core_sweep_csv(&cfg.run, &spec).map_err(err)
}

/// `(suite, check, value, tolerance, passed)`.
type CheckRow = (String, String, f64, f64, bool);

/// Run a verification suite, one row per check.
#[pyfunction]
#[pyo3(signature = (suite = "all", seed = 0))]
fn verify(py: Python<'_>, suite: &str, seed: u64) -> PyResult<Vec<CheckRow>> {
    let suite = suite.parse().map_err(err)?;
    let checks = py
        .detach(|| laguerre_core::suite::run_suite(suite, seed))
        .map_err(err)?;
    Ok(checks
        .into_iter()
        .map(|c| (c.suite.name().to_string(), c.name, c.value, c.tolerance, c.passed))
        .collect())
}

#[pymodule]
fn laguerre(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPmfRow>()?;
    m.add_class::<PyBound>()?;
    m.add_function(wrap_pyfunction!(pmf_row, m)?)?;
    m.add_function(wrap_pyfunction!(log_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(cdma_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_star, m)?)?;
    m.add_function(wrap_pyfunction!(sum_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_users, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
