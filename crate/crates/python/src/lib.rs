//! Python bindings. Samples are passed as lists of rows.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use subrank_core as core;
use core::error::Error;
use core::estimator::{estimate as estimate_grid, EstimatorConfig};
use core::generators::{generate as generate_sample, GeneratorKind, GeneratorSpec};
use core::independence::{self, StatisticKind};
use core::null_theory::{self, VarianceVariant};
use core::sample::SampleMatrix;
use core::smoothing;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn sample_from(rows: Vec<Vec<f64>>) -> PyResult<SampleMatrix> {
    SampleMatrix::from_rows(&rows).map_err(py_err)
}

fn variant_from(name: &str) -> PyResult<VarianceVariant> {
    match name {
        "sign_corrected" => Ok(VarianceVariant::SignCorrected),
        "printed_form" => Ok(VarianceVariant::PrintedForm),
        other => Err(PyValueError::new_err(format!("unknown variant {other:?}"))),
    }
}

/// Probability mass over the rank cells `{1..m}^d`.
#[pyclass(name = "RankGrid", frozen)]
struct PyRankGrid {
    inner: core::RankGrid,
}

#[pymethods]
impl PyRankGrid {
    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn total_draws(&self) -> u64 {
        self.inner.total_draws()
    }

    /// Weight of the cell with one-based ranks `r`.
    fn weight(&self, r: Vec<usize>) -> PyResult<f64> {
        self.inner.weight(&r).map_err(py_err)
    }

    fn total_weight(&self) -> f64 {
        self.inner.total_weight()
    }

    /// `(ranks, weight)` for every cell with positive weight.
    fn cells(&self) -> Vec<(Vec<usize>, f64)> {
        let shape = self.inner.shape();
        self.inner
            .nonzero()
            .filter(|(_, w)| *w > 0.0)
            .map(|(i, w)| (shape.decode(i), w))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("RankGrid(m={}, d={}, cells={})", self.m(), self.d(), self.inner.nonzero_count())
    }
}

/// Estimate the rank grid; all subsets are enumerated when `b` is None.
#[pyfunction]
#[pyo3(signature = (data, m, b=None, seed=0))]
fn estimate(data: Vec<Vec<f64>>, m: usize, b: Option<u64>, seed: u64) -> PyResult<PyRankGrid> {
    let sample = sample_from(data)?;
    let cfg = match b {
        Some(count) => EstimatorConfig::random(m, count, seed),
        None => EstimatorConfig::exhaustive(m),
    };
    Ok(PyRankGrid { inner: estimate_grid(&sample, &cfg).map_err(py_err)? })
}

#[pyfunction]
fn independence_pmf(m: usize, d: usize) -> PyResult<PyRankGrid> {
    Ok(PyRankGrid { inner: null_theory::independence_pmf(m, d).map_err(py_err)? })
}

#[pyfunction]
fn comonotone_pmf(m: usize) -> PyResult<PyRankGrid> {
    Ok(PyRankGrid { inner: null_theory::comonotone_pmf(m).map_err(py_err)? })
}

#[pyfunction]
fn kl_statistic(grid: &PyRankGrid, null_grid: &PyRankGrid) -> PyResult<f64> {
    independence::kl_statistic(&grid.inner, &null_grid.inner).map_err(py_err)
}

#[pyfunction]
fn l2_statistic(grid: &PyRankGrid, null_grid: &PyRankGrid) -> PyResult<f64> {
    independence::l2_statistic(&grid.inner, &null_grid.inner).map_err(py_err)
}

/// `(mean_limit, var_limit)` as exact fraction strings.
#[pyfunction]
#[pyo3(signature = (m, d, variant="sign_corrected"))]
fn null_moments(m: usize, d: usize, variant: &str) -> PyResult<(String, String)> {
    let v = null_theory::closed_form_moments(m, d, variant_from(variant)?).map_err(py_err)?;
    Ok((v.mean_limit.to_string(), v.var_limit.to_string()))
}

#[pyfunction]
#[pyo3(signature = (m, variant="sign_corrected"))]
fn border_dimension(m: usize, variant: &str) -> PyResult<usize> {
    null_theory::border_dimension(m, variant_from(variant)?).map_err(py_err)
}

/// Simulated null law of a statistic.
#[pyclass(name = "NullCalibration", frozen)]
struct PyNullCalibration {
    inner: independence::NullCalibration,
}

#[pymethods]
impl PyNullCalibration {
    #[getter]
    fn null_draws(&self) -> Vec<f64> {
        self.inner.null_draws.clone()
    }

    fn threshold(&self, level: f64) -> PyResult<f64> {
        self.inner.threshold(level).map_err(py_err)
    }

    fn p_value(&self, statistic: f64) -> f64 {
        self.inner.p_value(statistic)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

#[pyfunction]
#[pyo3(signature = (m, d, n, b, n_sims, seed=0, statistic="kl"))]
fn calibrate_null(
    m: usize,
    d: usize,
    n: usize,
    b: u64,
    n_sims: usize,
    seed: u64,
    statistic: &str,
) -> PyResult<PyNullCalibration> {
    let kind: StatisticKind = statistic.parse().map_err(py_err)?;
    let inner = independence::calibrate_null(m, d, n, b, n_sims, seed, kind).map_err(py_err)?;
    Ok(PyNullCalibration { inner })
}

/// Returns `(statistic, p_value, reject)`.
#[pyfunction]
#[pyo3(signature = (data, calibration, level=0.05, seed=0))]
fn independence_test(
    data: Vec<Vec<f64>>,
    calibration: &PyNullCalibration,
    level: f64,
    seed: u64,
) -> PyResult<(f64, f64, bool)> {
    let sample = sample_from(data)?;
    let r = independence::independence_test(&sample, &calibration.inner, level, seed)
        .map_err(py_err)?;
    Ok((r.statistic, r.p_value, r.reject))
}

/// Draw `n` rows from a data model such as `"polynomial:p=2,coef=0.5"`.
#[pyfunction]
#[pyo3(signature = (model, n, d, seed=0))]
fn generate(model: &str, n: usize, d: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
    let kind = GeneratorKind::parse(model).map_err(py_err)?;
    let sample = generate_sample(&GeneratorSpec::new(kind, n, d, seed)).map_err(py_err)?;
    Ok(sample.rows().collect())
}

/// Beta-mixture copula density smoothed from a grid.
#[pyclass(name = "SmoothedCopula", frozen)]
struct PySmoothedCopula {
    inner: smoothing::SmoothedCopula,
}

#[pymethods]
impl PySmoothedCopula {
    #[new]
    fn new(grid: &PyRankGrid) -> Self {
        PySmoothedCopula { inner: smoothing::smooth(&grid.inner) }
    }

    fn density(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.density(&x).map_err(py_err)
    }

    #[pyo3(signature = (k, seed=0))]
    fn sample(&self, k: usize, seed: u64) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.inner.sample(k, seed).map_err(py_err)?.rows().collect())
    }
}

#[pymodule]
fn subrank(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRankGrid>()?;
    m.add_class::<PyNullCalibration>()?;
    m.add_class::<PySmoothedCopula>()?;
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(independence_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(comonotone_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(kl_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(l2_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(null_moments, m)?)?;
    m.add_function(wrap_pyfunction!(border_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate_null, m)?)?;
    m.add_function(wrap_pyfunction!(independence_test, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    Ok(())
}
