use instanton::classify::{search_admissible, Asymptotics};
use instanton::cky::cky_decay_check;
use instanton::curvature::{curvature_pack, weyl_split};
use instanton::pd::{pd_ale_limit, pd_params_from_roots, pd_regularity, pd_scan, pd_selfdual_check, ScanCase};
use instanton::report::{verify, RodFile, Suite, VerifyOptions};
use instanton::tod::{tod_fields, tod_metric, tod_orientation};
use instanton::{Error, Mode, Nut};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;
use serde::Serialize;
use serde_json::Value;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidRodData(_) | Error::InvalidRoots(_) | Error::Precondition(_) | Error::OutOfDomain(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn value_to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    match v {
        Value::Null => Ok(py.None()),
        Value::Bool(b) => b.into_py_any(py),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_py_any(py),
            None => n.as_f64().unwrap_or(f64::NAN).into_py_any(py),
        },
        Value::String(s) => s.into_py_any(py),
        Value::Array(a) => {
            let items = a.iter().map(|x| value_to_py(py, x)).collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_py_any(py)
        }
        Value::Object(m) => {
            let d = PyDict::new(py);
            for (k, x) in m {
                d.set_item(k, value_to_py(py, x)?)?;
            }
            d.into_py_any(py)
        }
    }
}

fn to_py<T: Serialize>(py: Python<'_>, x: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(x).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    value_to_py(py, &v)
}

/// Turning points, weights and the constant `c < 0` of a Tod metric.
#[pyclass(name = "RodData", frozen)]
struct PyRodData {
    inner: instanton::RodData,
}

#[pymethods]
impl PyRodData {
    #[new]
    #[pyo3(signature = (c, z, a, mode = "ale"))]
    fn new(c: f64, z: Vec<f64>, a: Vec<f64>, mode: &str) -> PyResult<Self> {
        if z.len() != a.len() {
            return Err(PyValueError::new_err("z and a must have the same length"));
        }
        let mode = match mode {
            "ale" => Mode::Ale,
            "free" => Mode::Free,
            other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
        };
        let nuts = z.into_iter().zip(a).map(|(z, a)| Nut { z, a }).collect();
        Ok(PyRodData {
            inner: instanton::RodData::new(c, nuts, mode).map_err(err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (a = 1.0))]
    fn eguchi_hanson(a: f64) -> Self {
        PyRodData {
            inner: instanton::RodData::eguchi_hanson(a),
        }
    }

    /// Parses the JSON rod-file format; string numbers select exact mode.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = RodFile::parse(text).and_then(|f| f.to_rod_data()).map_err(err)?;
        Ok(PyRodData { inner })
    }

    #[getter]
    fn c(&self) -> f64 {
        self.inner.c()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn z(&self) -> Vec<f64> {
        self.inner.nuts().iter().map(|n| n.z).collect()
    }

    #[getter]
    fn a(&self) -> Vec<f64> {
        self.inner.nuts().iter().map(|n| n.a).collect()
    }

    /// `{"W", "F", "e2nu", "z", "x"}` at `(rho, zeta)`.
    fn fields<'py>(&self, py: Python<'py>, rho: f64, zeta: f64) -> PyResult<Bound<'py, PyDict>> {
        let f = tod_fields(&self.inner, rho, zeta, 0).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("W", f.w.value())?;
        d.set_item("F", f.f.value())?;
        d.set_item("e2nu", f.e2nu.value())?;
        d.set_item("z", f.z.value())?;
        d.set_item("x", f.x.value())?;
        Ok(d)
    }

    /// Metric components in the chart (tau, y, rho, zeta).
    fn metric(&self, rho: f64, zeta: f64) -> PyResult<Vec<Vec<f64>>> {
        let g = tod_metric(&self.inner, rho, zeta).map_err(err)?.values();
        Ok(g.iter().map(|r| r.to_vec()).collect())
    }

    /// Self-dual and anti-self-dual Weyl eigenvalues and the simple eigenvalue.
    fn weyl<'py>(&self, py: Python<'py>, rho: f64, zeta: f64) -> PyResult<Bound<'py, PyDict>> {
        let pack = curvature_pack(&tod_metric(&self.inner, rho, zeta).map_err(err)?).map_err(err)?;
        let w = weyl_split(&pack, tod_orientation(&self.inner, rho, zeta).map_err(err)?);
        let d = PyDict::new(py);
        d.set_item("sd", w.sd_eigenvalues.to_vec())?;
        d.set_item("asd", w.asd_eigenvalues.to_vec())?;
        d.set_item("lambda", w.lambda)?;
        d.set_item("ricci_ratio", pack.ricci_norm() / pack.riemann_norm())?;
        Ok(d)
    }

    /// Runs a verification suite and returns the report as a dict.
    #[pyo3(signature = (suite = "all", seed = 0, samples = 20))]
    fn verify(&self, py: Python<'_>, suite: &str, seed: u64, samples: usize) -> PyResult<Py<PyAny>> {
        let suite = match suite {
            "fields" => Suite::Fields,
            "curvature" => Suite::Curvature,
            "rods" => Suite::Rods,
            "cky" => Suite::Cky,
            "all" => Suite::All,
            other => return Err(PyValueError::new_err(format!("unknown suite {other:?}"))),
        };
        let opt = VerifyOptions {
            samples: samples.max(1),
            seed,
            ..VerifyOptions::default()
        };
        to_py(py, &verify(&self.inner, suite, b"", &opt))
    }

    #[pyo3(signature = (radii, theta = 1.0))]
    fn cky_decay(&self, py: Python<'_>, radii: Vec<f64>, theta: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &cky_decay_check(&self.inner, &radii, theta).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("RodData(c={}, z={:?}, a={:?})", self.inner.c(), self.z(), self.a())
    }
}

/// Plebanski-Demianski quartic from four increasing roots with unit product.
#[pyclass(name = "PdParams", frozen)]
struct PyPdParams {
    inner: instanton::pd::PdParams,
}

#[pymethods]
impl PyPdParams {
    #[new]
    #[pyo3(signature = (roots, a0 = 1.0))]
    fn new(roots: [f64; 4], a0: f64) -> PyResult<Self> {
        Ok(PyPdParams {
            inner: pd_params_from_roots(roots, a0).map_err(err)?,
        })
    }

    #[getter]
    fn roots(&self) -> [f64; 4] {
        self.inner.roots
    }

    fn is_self_dual(&self) -> bool {
        self.inner.is_self_dual()
    }

    fn is_flat(&self) -> bool {
        self.inner.is_flat()
    }

    fn rectangle_ok(&self) -> bool {
        self.inner.rectangle_ok()
    }

    fn regularity(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &pd_regularity(&self.inner).map_err(err)?)
    }

    fn selfdual_check(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &pd_selfdual_check(&self.inner).map_err(err)?)
    }

    #[pyo3(signature = (r, theta = 1.0, c = 1.0))]
    fn ale_limit(&self, py: Python<'_>, r: f64, theta: f64, c: f64) -> PyResult<Py<PyAny>> {
        to_py(py, &pd_ale_limit(&self.inner, r, theta, c).map_err(err)?)
    }
}

#[pyfunction]
#[pyo3(signature = (nmax = 4, lmax = 10, asymptotics = "ale"))]
fn classify(py: Python<'_>, nmax: usize, lmax: i64, asymptotics: &str) -> PyResult<Py<PyAny>> {
    let asym = match asymptotics {
        "ale" => Asymptotics::Ale,
        "af" => Asymptotics::Af,
        other => return Err(PyValueError::new_err(format!("unknown asymptotics {other:?}"))),
    };
    to_py(py, &search_admissible(nmax, lmax, asym).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (case, samples = 1000, seed = 0))]
fn pd_scan_case(py: Python<'_>, case: &str, samples: usize, seed: u64) -> PyResult<Py<PyAny>> {
    let case = ScanCase::parse(case).ok_or_else(|| PyValueError::new_err(format!("unknown case {case:?}")))?;
    let rep = py.detach(|| pd_scan(case, samples, seed)).map_err(err)?;
    to_py(py, &rep)
}

#[pymodule]
fn toric_instanton(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRodData>()?;
    m.add_class::<PyPdParams>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(pd_scan_case, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
