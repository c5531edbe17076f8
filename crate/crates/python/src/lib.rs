//! Python bindings: sampled paths, fractional operators, norms, variation,
//! integrals and BV functions.

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pathint::convexbv::BVFunction;
use pathint::fracops::{self, FracOrder, Reconstruction};
use pathint::glsint::{self, GlsConfig};
use pathint::paths::{self, JumpDistribution};
use pathint::variation::{self, TagRule, TaggedPartition};
use pathint::{Error, ProcessKind, ProcessSpec, SampledPath};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Numeric(_) => PyArithmeticError::new_err(e.to_string()),
        Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for pathint::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn order(beta: f64) -> PyResult<FracOrder> {
    FracOrder::new(beta).py_err()
}

fn recon(name: &str) -> PyResult<Reconstruction> {
    name.parse().py_err()
}

/// A sampled trajectory on a strictly increasing time grid.
#[pyclass(name = "Path", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPath(SampledPath);

#[pymethods]
impl PyPath {
    #[new]
    #[pyo3(signature = (times, values, label = String::new()))]
    fn new(times: Vec<f64>, values: Vec<f64>, label: String) -> PyResult<Self> {
        SampledPath::new(times, values, label).py_err().map(Self)
    }

    /// Values on the uniform grid over `[0, horizon]`.
    #[staticmethod]
    fn uniform(horizon: f64, values: Vec<f64>) -> PyResult<Self> {
        SampledPath::uniform(horizon, values, "").py_err().map(Self)
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn label(&self) -> String {
        self.0.label().to_string()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("Path(len={}, horizon={}, label={:?})", self.0.len(), self.0.horizon(), self.0.label())
    }

    /// `(alpha, constant)` of the dyadic Hölder estimate.
    fn holder_estimate(&self) -> PyResult<(f64, f64)> {
        let h = paths::holder_estimate(&self.0).py_err()?;
        Ok((h.alpha, h.constant))
    }

    fn subsample(&self, stride: usize) -> PyResult<Self> {
        self.0.subsample(stride).py_err().map(Self)
    }
}

/// Simulate `fbm`, `brownian` or `poisson` (standard normal jumps) on `n` points.
#[pyfunction]
#[pyo3(signature = (kind, n, seed = 0, hurst = 0.75, rate = 1.0, horizon = 1.0))]
fn simulate(kind: &str, n: usize, seed: u64, hurst: f64, rate: f64, horizon: f64) -> PyResult<PyPath> {
    let kind = match kind {
        "fbm" => ProcessKind::Fbm { hurst },
        "brownian" => ProcessKind::Brownian,
        "poisson" => ProcessKind::CompoundPoisson {
            rate,
            jump_dist: JumpDistribution::Normal { mean: 0.0, std: 1.0 },
        },
        other => return Err(PyValueError::new_err(format!("unknown process kind '{other}'"))),
    };
    pathint::generate(&ProcessSpec::new(kind, horizon, n, seed)).py_err().map(PyPath)
}

/// Simulate from a JSON process spec.
#[pyfunction]
fn simulate_spec(spec_json: &str) -> PyResult<PyPath> {
    let spec: ProcessSpec = serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    pathint::generate(&spec).py_err().map(PyPath)
}

#[pyfunction]
#[pyo3(signature = (path, beta, recon = "linear"))]
fn frac_integral_left(path: &PyPath, beta: f64, recon: &str) -> PyResult<PyPath> {
    fracops::frac_integral_left(&path.0, order(beta)?, self::recon(recon)?).py_err().map(PyPath)
}

#[pyfunction]
#[pyo3(signature = (path, beta, recon = "linear"))]
fn frac_deriv_left(path: &PyPath, beta: f64, recon: &str) -> PyResult<PyPath> {
    fracops::frac_deriv_left(&path.0, order(beta)?, self::recon(recon)?).py_err().map(PyPath)
}

#[pyfunction]
#[pyo3(signature = (path, alpha, t, recon = "linear"))]
fn frac_deriv_right(path: &PyPath, alpha: f64, t: f64, recon: &str) -> PyResult<PyPath> {
    fracops::frac_deriv_right(&path.0, order(alpha)?, t, self::recon(recon)?).py_err().map(PyPath)
}

/// `(value, saturated)` of the `w1` or `w2` norm.
#[pyfunction]
#[pyo3(signature = (path, beta, norm = "w2", recon = "linear"))]
fn besov_norm(path: &PyPath, beta: f64, norm: &str, recon: &str) -> PyResult<(f64, bool)> {
    let (b, r) = (order(beta)?, self::recon(recon)?);
    let report = match norm {
        "w1" => fracops::besov_norm_w1_with(&path.0, b, r),
        "w2" => fracops::besov_norm_w2_with(&path.0, b, r),
        other => return Err(PyValueError::new_err(format!("unknown norm '{other}'"))),
    };
    Ok((report.value, report.saturated))
}

/// Supremum of the p-variation over sub-partitions of the grid.
#[pyfunction]
fn sup_p_variation<'py>(py: Python<'py>, path: &PyPath, p: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = variation::sup_p_variation(&path.0, p).py_err()?;
    let d = PyDict::new(py);
    d.set_item("p", r.p)?;
    d.set_item("along_partition", r.along_partition)?;
    d.set_item("supremum", r.supremum)?;
    d.set_item("maximizing_subset", r.maximizing_subset)?;
    d.set_item("exact", r.exact)?;
    Ok(d)
}

/// Quadratic variation along dyadic partitions of the given levels.
#[pyfunction]
fn quadratic_variation(path: &PyPath, levels: Vec<u32>) -> PyResult<Vec<f64>> {
    let parts = levels
        .iter()
        .map(|&k| TaggedPartition::dyadic(path.0.len(), k, TagRule::Forward))
        .collect::<pathint::Result<Vec<_>>>()
        .py_err()?;
    variation::quadratic_variation(&path.0, &parts).py_err()
}

/// gLS integral of `f` against `g` up to `t` (default: horizon).
#[pyfunction]
#[pyo3(signature = (f, g, beta, t = None, recon_f = "linear", recon_g = "linear"))]
fn gls_integral<'py>(
    py: Python<'py>,
    f: &PyPath,
    g: &PyPath,
    beta: f64,
    t: Option<f64>,
    recon_f: &str,
    recon_g: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = GlsConfig::new(order(beta)?).with_recon(recon(recon_f)?, recon(recon_g)?);
    let r = glsint::gls_integral(&f.0, &g.0, &cfg, t.unwrap_or(f.0.horizon())).py_err()?;
    let d = PyDict::new(py);
    d.set_item("value", r.value)?;
    d.set_item("beta_used", r.beta_used)?;
    d.set_item("apriori_bound", r.apriori_bound)?;
    d.set_item("diagnostics", r.diagnostics)?;
    Ok(d)
}

/// Riemann–Stieltjes sum over the full grid or `intervals` equal blocks.
#[pyfunction]
#[pyo3(signature = (f, g, tags = "forward", intervals = None))]
fn rs_sum(f: &PyPath, g: &PyPath, tags: &str, intervals: Option<usize>) -> PyResult<f64> {
    let rule: TagRule = tags.parse().py_err()?;
    let part = match intervals {
        None => TaggedPartition::full(g.0.len(), rule),
        Some(k) => TaggedPartition::uniform(g.0.len(), k, rule),
    }
    .py_err()?;
    glsint::rs_sum(&f.0, &g.0, &part).py_err()
}

/// Left-continuous BV function given by measures.
#[pyclass(name = "BVFunction", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBVFunction(BVFunction);

#[pymethods]
impl PyBVFunction {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// The left derivative of `(x - a)^+`.
    #[staticmethod]
    fn indicator_above(a: f64) -> Self {
        Self(BVFunction::indicator_above(a))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn evaluate(&self, x: f64) -> f64 {
        self.0.evaluate(x)
    }

    fn antiderivative(&self, x: f64) -> f64 {
        self.0.antiderivative(x)
    }

    fn truncate_to_compact(&self, n: f64) -> PyResult<Self> {
        self.0.truncate_to_compact(n).py_err().map(Self)
    }

    /// The path `t ↦ f(X_t)`.
    fn compose(&self, path: &PyPath) -> PyResult<PyPath> {
        path.0.map(|v| self.0.evaluate(v)).py_err().map(PyPath)
    }
}

/// Certified density constant for fBm with the given Hurst index.
#[pyfunction]
fn density_constant_fbm(hurst: f64, horizon: f64) -> PyResult<f64> {
    let vf = paths::VarianceFunction::fbm(hurst).py_err()?;
    paths::check_density_assumption(&vf, horizon).py_err()
}

#[pymodule(name = "pathint")]
mod pathint_py {
    #[pymodule_export]
    use super::{
        besov_norm, density_constant_fbm, frac_deriv_left, frac_deriv_right, frac_integral_left,
        gls_integral, quadratic_variation, rs_sum, simulate, simulate_spec, sup_p_variation, PyBVFunction,
        PyPath,
    };
}
