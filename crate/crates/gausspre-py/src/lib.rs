//! Python bindings for the gausspre library: distributions, fitting, built
//! activation tables, Edge-of-Chaos diagnostics, KS testing, and the
//! Monte-Carlo product test.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use std::path::PathBuf;

use gausspre::activation_fit::{
    build_activation, fit, fit_loss, theta_conjugate, ActivationTable, DensityModel, FitConfig,
    GridConfig, TableConfig,
};
use gausspre::distributions::SymmetricWeibull;
use gausspre::eoc::{Activation, EocSetting, Identity, Relu, Tanh};
use gausspre::kstest;
use gausspre::mellin::{laguerre_coefficients, PrecisionMode};
use gausspre::propagation::{product_test, Init};
use gausspre::rng::stream_rng;

fn to_py_err(e: gausspre::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Symmetric Weibull initialization law W(theta, 1).
#[pyclass(name = "SymmetricWeibull")]
struct PySymmetricWeibull {
    inner: SymmetricWeibull,
}

#[pymethods]
impl PySymmetricWeibull {
    #[new]
    fn new(theta: f64) -> PyResult<Self> {
        Ok(Self { inner: SymmetricWeibull::new(theta).map_err(to_py_err)? })
    }

    fn cdf(&self, t: f64) -> PyResult<f64> {
        self.inner.cdf(t).map_err(to_py_err)
    }

    fn density(&self, t: f64) -> f64 {
        self.inner.density(t)
    }

    fn quantile(&self, p: f64) -> PyResult<f64> {
        self.inner.quantile(p).map_err(to_py_err)
    }

    fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream_rng(seed, 0);
        (0..n).map(|_| self.inner.sample_one(&mut rng)).collect()
    }
}

/// Fitted density-family parameters for one shape theta.
#[pyclass(name = "DensityModel")]
#[derive(Clone)]
struct PyDensityModel {
    inner: DensityModel,
}

#[pymethods]
impl PyDensityModel {
    #[new]
    fn new(theta: f64, alpha: f64, gamma: f64, lambda1: f64, lambda2: f64) -> PyResult<Self> {
        Ok(Self {
            inner: DensityModel::new(theta, alpha, gamma, lambda1, lambda2).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn lambda1(&self) -> f64 {
        self.inner.lambda1
    }

    #[getter]
    fn lambda2(&self) -> f64 {
        self.inner.lambda2
    }

    #[getter]
    fn theta_prime(&self) -> f64 {
        self.inner.theta_prime()
    }

    fn g(&self, x: f64) -> f64 {
        self.inner.g(x)
    }

    fn loss(&self) -> PyResult<f64> {
        fit_loss(&self.inner, GridConfig::default()).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "DensityModel(theta={}, alpha={:.6}, gamma={:.6}, lambda1={:.6}, lambda2={:.6})",
            self.inner.theta, self.inner.alpha, self.inner.gamma, self.inner.lambda1,
            self.inner.lambda2
        )
    }
}

/// Tabulated activation phi_theta.
#[pyclass(name = "ActivationTable")]
struct PyActivationTable {
    inner: ActivationTable,
}

#[pymethods]
impl PyActivationTable {
    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    #[getter]
    fn fit_loss(&self) -> f64 {
        self.inner.fit_loss()
    }

    fn eval(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn deriv(&self, x: f64) -> f64 {
        self.inner.deriv(x)
    }

    fn eval_many(&self, xs: Vec<f64>) -> Vec<f64> {
        xs.iter().map(|&x| self.inner.eval(x)).collect()
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: ActivationTable::load(&path).map_err(to_py_err)? })
    }
}

/// theta' with 1/theta + 1/theta' = 1/2.
#[pyfunction]
#[pyo3(name = "theta_conjugate")]
fn py_theta_conjugate(theta: f64) -> PyResult<f64> {
    theta_conjugate(theta).map_err(to_py_err)
}

/// Full fit pipeline for one shape; returns the fitted model.
#[pyfunction]
#[pyo3(signature = (theta, seed=0, epochs=100))]
fn fit_model(theta: f64, seed: u64, epochs: usize) -> PyResult<PyDensityModel> {
    let cfg = FitConfig { seed, epochs, ..FitConfig::default() };
    let (model, _) = fit(theta, cfg).map_err(to_py_err)?;
    Ok(PyDensityModel { inner: model })
}

/// Builds the tabulated activation from a fitted model.
#[pyfunction]
fn build_table(model: &PyDensityModel) -> PyResult<PyActivationTable> {
    let table = build_activation(&model.inner, TableConfig::default()).map_err(to_py_err)?;
    Ok(PyActivationTable { inner: table })
}

fn named_activation(name: &str) -> PyResult<Box<dyn Activation>> {
    match name {
        "tanh" => Ok(Box::new(Tanh)),
        "relu" => Ok(Box::new(Relu)),
        "identity" => Ok(Box::new(Identity)),
        other => Err(PyValueError::new_err(format!(
            "unknown activation '{other}' (expected tanh, relu, or identity)"
        ))),
    }
}

fn with_activation<T>(
    activation: &Bound<'_, PyAny>,
    f: impl FnOnce(&dyn Activation) -> PyResult<T>,
) -> PyResult<T> {
    if let Ok(name) = activation.extract::<String>() {
        let act = named_activation(&name)?;
        f(act.as_ref())
    } else {
        let table = activation.downcast::<PyActivationTable>()?;
        let table = table.borrow();
        f(&table.inner)
    }
}

/// chi_1 = derivative of the correlation map at c=1 for the given setting.
/// `activation` is either a name ("tanh", "relu", "identity") or an
/// ActivationTable.
#[pyfunction]
fn chi1(activation: &Bound<'_, PyAny>, sigma_w: f64, sigma_b: f64) -> PyResult<f64> {
    with_activation(activation, |act| {
        let setting = EocSetting::new(sigma_w, sigma_b, act).map_err(to_py_err)?;
        gausspre::eoc::chi1(&setting).map_err(to_py_err)
    })
}

/// Variance map V(v) for the given setting.
#[pyfunction]
fn variance_map(
    activation: &Bound<'_, PyAny>,
    sigma_w: f64,
    sigma_b: f64,
    v: f64,
) -> PyResult<f64> {
    with_activation(activation, |act| {
        let setting = EocSetting::new(sigma_w, sigma_b, act).map_err(to_py_err)?;
        gausspre::eoc::variance_map(v, &setting).map_err(to_py_err)
    })
}

/// KS test of samples against the standard normal CDF.
#[pyfunction]
#[pyo3(signature = (samples, alpha=0.05))]
fn ks_test_normal(samples: Vec<f64>, alpha: f64) -> PyResult<(f64, f64, bool)> {
    let r = kstest::ks_test(&samples, gausspre::distributions::std_normal_cdf, alpha)
        .map_err(to_py_err)?;
    Ok((r.statistic, r.threshold, r.reject))
}

/// Laguerre inversion coefficients; returns (coefficients, divergence_index).
#[pyfunction]
#[pyo3(signature = (theta, k_max, extended=false))]
fn laguerre_series(
    theta: f64,
    k_max: usize,
    extended: bool,
) -> PyResult<(Vec<f64>, Option<usize>)> {
    let mode = if extended { PrecisionMode::Extended } else { PrecisionMode::Float64 };
    let s = laguerre_coefficients(theta, k_max, mode).map_err(to_py_err)?;
    Ok((s.coefficients, s.divergence_index))
}

/// Monte-Carlo product test W * phi_theta(X); returns
/// (std, ks_raw, ks_standardized).
#[pyfunction]
#[pyo3(signature = (table, s=100_000, seed=0))]
fn table_product_test(
    table: &PyActivationTable,
    s: usize,
    seed: u64,
) -> PyResult<(f64, f64, f64)> {
    let report = product_test(
        1,
        &table.inner,
        Init::Weibull { theta: table.inner.theta() },
        s,
        seed,
    )
    .map_err(to_py_err)?;
    Ok((report.std, report.ks_raw.statistic, report.ks_standardized.statistic))
}

#[pymodule]
fn gausspre_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySymmetricWeibull>()?;
    m.add_class::<PyDensityModel>()?;
    m.add_class::<PyActivationTable>()?;
    m.add_function(wrap_pyfunction!(py_theta_conjugate, m)?)?;
    m.add_function(wrap_pyfunction!(fit_model, m)?)?;
    m.add_function(wrap_pyfunction!(build_table, m)?)?;
    m.add_function(wrap_pyfunction!(chi1, m)?)?;
    m.add_function(wrap_pyfunction!(variance_map, m)?)?;
    m.add_function(wrap_pyfunction!(ks_test_normal, m)?)?;
    m.add_function(wrap_pyfunction!(laguerre_series, m)?)?;
    m.add_function(wrap_pyfunction!(table_product_test, m)?)?;
    Ok(())
}
