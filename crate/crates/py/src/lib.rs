//! Python bindings. Matrices cross the boundary as lists of rows.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rbm_core::benchmarks::{self as bench, GridSpacing, ParameterSample, ParametricFom, TrainingSet};
use rbm_core::greedy::{self, GreedyConfig, GreedyOutcome, Scheme};
use rbm_core::harness::{self, ExperimentConfig};
use rbm_core::linalg::DenseMatrix;
use rbm_core::reduction::{rom_solve, true_output_error, IndicatorMode};
use rbm_core::selector::{self, SelectorConfig, SelectorKind};

fn err(e: rbm_core::Error) -> PyErr {
    match e {
        rbm_core::Error::Io(io) => PyIOError::new_err(io.to_string()),
        other => PyValueError::new_err(format!("{}: {other}", other.kind())),
    }
}

fn to_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i)).collect()
}

fn from_rows(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
    DenseMatrix::from_rows(&refs).map_err(err)
}

fn sample(mu: Vec<f64>) -> ParameterSample {
    ParameterSample::new(mu)
}

/// Full-order model of one of the benchmarks.
#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: ParametricFom,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    #[pyo3(signature = (n = 1000, dt = 0.001, horizon = 2.0))]
    fn burgers(n: usize, dt: f64, horizon: f64) -> PyResult<Self> {
        Ok(Self { inner: bench::build_burgers(n, dt, horizon).map_err(err)? })
    }

    #[staticmethod]
    #[pyo3(signature = (mesh_density = 32))]
    fn thermal(mesh_density: usize) -> PyResult<Self> {
        Ok(Self { inner: bench::build_thermal(mesh_density).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.inner.domain.lower.clone(), self.inner.domain.upper.clone())
    }

    /// Output trajectory at `mu`, one row per output component.
    fn solve_outputs(&self, py: Python<'_>, mu: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let y = py.detach(|| self.inner.solve_outputs(&sample(mu))).map_err(err)?;
        Ok(to_rows(&y))
    }

    /// Training grid over the model's parameter domain.
    #[pyo3(signature = (counts, spacing = "linear"))]
    fn grid(&self, counts: Vec<usize>, spacing: &str) -> PyResult<PyTrainingSet> {
        let spacing = match spacing {
            "linear" => GridSpacing::Linear,
            "log" => GridSpacing::Log,
            other => return Err(PyValueError::new_err(format!("unknown spacing '{other}'"))),
        };
        let set = TrainingSet::grid(&self.inner.domain, &counts, spacing).map_err(err)?;
        Ok(PyTrainingSet { inner: set })
    }

    /// Uniform random samples, optionally disjoint from `exclude`.
    #[pyo3(signature = (count, seed, exclude = None))]
    fn random(&self, count: usize, seed: u64, exclude: Option<&PyTrainingSet>) -> PyResult<PyTrainingSet> {
        let set = TrainingSet::random(&self.inner.domain, count, seed, exclude.map(|e| &e.inner)).map_err(err)?;
        Ok(PyTrainingSet { inner: set })
    }
}

#[pyclass(name = "TrainingSet", frozen)]
struct PyTrainingSet {
    inner: TrainingSet,
}

#[pymethods]
impl PyTrainingSet {
    #[staticmethod]
    fn burgers(count: usize) -> PyResult<Self> {
        Ok(Self { inner: bench::burgers_training_set(count).map_err(err)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn samples(&self) -> Vec<Vec<f64>> {
        self.inner.samples().iter().map(|s| s.values.clone()).collect()
    }
}

/// Result of a greedy run: the reduced model and the iteration trace.
#[pyclass(name = "Outcome", frozen)]
struct PyOutcome {
    inner: GreedyOutcome,
}

#[pymethods]
impl PyOutcome {
    #[getter]
    fn converged(&self) -> bool {
        self.inner.trace.converged
    }

    #[getter]
    fn termination(&self) -> String {
        format!("{:?}", self.inner.trace.termination)
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.trace.iterations()
    }

    #[getter]
    fn final_estimate(&self) -> f64 {
        self.inner.trace.final_estimate
    }

    #[getter]
    fn offline_seconds(&self) -> f64 {
        self.inner.trace.offline_seconds
    }

    #[getter]
    fn basis_dim(&self) -> usize {
        self.inner.basis.dim()
    }

    #[getter]
    fn interpolation_size(&self) -> usize {
        self.inner.rom.interpolation_size()
    }

    #[getter]
    fn stage_switch_fallback(&self) -> bool {
        self.inner.trace.stage_switch_fallback
    }

    /// Fine-set indices of the enriched parameters, in order.
    fn selected_parameters(&self) -> Vec<usize> {
        self.inner.trace.selected_parameters()
    }

    /// Fine-set indices of the subsampled training set, if any.
    fn subsampled(&self) -> Option<Vec<usize>> {
        self.inner.trace.selection.clone()
    }

    fn records<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner
            .trace
            .records
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("iteration", r.iteration)?;
                d.set_item("stage", r.stage)?;
                d.set_item("parameter_index", r.parameter_index)?;
                d.set_item("mu", r.mu.clone())?;
                d.set_item("delta", r.delta)?;
                d.set_item("r_pod", r.r_pod)?;
                d.set_item("r", r.r)?;
                d.set_item("r_ei", r.r_ei)?;
                d.set_item("max_estimate", r.max_estimate)?;
                d.set_item("orthogonality_error", r.orthogonality_error)?;
                d.set_item("selection_len", r.selection_len)?;
                d.set_item("seconds", r.seconds)?;
                Ok(d)
            })
            .collect()
    }

    /// Reduced output trajectory at `mu`.
    fn rom_outputs(&self, py: Python<'_>, mu: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let traj = py.detach(|| rom_solve(&self.inner.rom, &sample(mu))).map_err(err)?;
        Ok(to_rows(&traj.outputs))
    }

    /// Largest time-averaged output error over `test`, and the per-sample errors.
    fn test_error(&self, py: Python<'_>, model: &PyModel, test: &PyTrainingSet) -> PyResult<(f64, Vec<f64>)> {
        let r = py
            .detach(|| true_output_error(&model.inner, Some(&self.inner.rom), &test.inner))
            .map_err(err)?;
        Ok((r.max, r.per_parameter))
    }

    fn basis(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.basis.matrix().map(|v| to_rows(&v))
    }
}

/// Runs `scheme` ("fixed", "scheme1" or "scheme2") on `train`.
#[pyfunction]
#[pyo3(signature = (
    scheme, model, train, *, selector = "qdeim", tol = 1e-6, tol_coarse = 1.0,
    eps_svd = 1e-6, eps_qr = 1e-6, oversample = 2.0, max_iterations = 200,
    stride = 1, seed = 0, indicator = "residual", deim_floor = 1e-10
))]
#[allow(clippy::too_many_arguments)]
fn run_scheme(
    py: Python<'_>,
    scheme: &str,
    model: &PyModel,
    train: &PyTrainingSet,
    selector: &str,
    tol: f64,
    tol_coarse: f64,
    eps_svd: f64,
    eps_qr: f64,
    oversample: f64,
    max_iterations: usize,
    stride: usize,
    seed: u64,
    indicator: &str,
    deim_floor: f64,
) -> PyResult<PyOutcome> {
    let scheme = Scheme::parse(scheme).map_err(err)?;
    let cfg = GreedyConfig {
        tol,
        tol_coarse,
        selector: SelectorKind::parse(selector).map_err(err)?,
        eps_svd,
        eps_qr,
        oversample,
        max_iterations,
        stride,
        seed,
        indicator: IndicatorMode::parse(indicator).map_err(err)?,
        deim_floor,
    };
    let outcome = py
        .detach(|| greedy::run_scheme(scheme, &model.inner, &train.inner, &cfg))
        .map_err(err)?;
    Ok(PyOutcome { inner: outcome })
}

/// Row indices picked by `kind` from a snapshot matrix with one row per
/// candidate.
#[pyfunction]
#[pyo3(signature = (kind, matrix, *, eps_svd = 1e-6, eps_qr = 1e-6, oversample = 2.0, seed = 0))]
fn select(kind: &str, matrix: Vec<Vec<f64>>, eps_svd: f64, eps_qr: f64, oversample: f64, seed: u64) -> PyResult<Vec<usize>> {
    let kind = SelectorKind::parse(kind).map_err(err)?;
    let y = from_rows(matrix)?;
    let cfg = SelectorConfig { eps_svd, eps_qr, oversample, seed };
    Ok(selector::select(kind, &y, &cfg).map_err(err)?.indices)
}

/// DEIM interpolation indices of the leading left singular vectors.
#[pyfunction]
#[pyo3(signature = (matrix, eps_svd = 1e-10))]
fn deim(matrix: Vec<Vec<f64>>, eps_svd: f64) -> PyResult<Vec<usize>> {
    Ok(selector::deim(&from_rows(matrix)?, eps_svd).map_err(err)?.indices)
}

/// The 2500 × 1600 toy snapshot matrix.
#[pyfunction]
fn toy_snapshots() -> Vec<Vec<f64>> {
    to_rows(&bench::toy::toy_snapshots().matrix)
}

#[pyfunction]
fn write_matrix(path: PathBuf, matrix: Vec<Vec<f64>>) -> PyResult<()> {
    harness::write_matrix(&path, &from_rows(matrix)?).map_err(err)
}

#[pyfunction]
fn read_matrix(path: PathBuf) -> PyResult<Vec<Vec<f64>>> {
    Ok(to_rows(&harness::read_matrix(&path).map_err(err)?))
}

/// Runs an experiment described by a TOML config string, writing its
/// artifacts under `out`. Returns the report rows.
#[pyfunction]
#[pyo3(signature = (config, out = None))]
fn run_experiment<'py>(py: Python<'py>, config: &str, out: Option<PathBuf>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let mut cfg = ExperimentConfig::from_toml_str(config).map_err(err)?;
    if let Some(out) = out {
        cfg.out = out;
    }
    let summary = py.detach(|| harness::run_experiment(&cfg)).map_err(err)?;
    summary
        .rows
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("method", &r.method)?;
            d.set_item("n_train", r.n_train)?;
            d.set_item("eps_t_max", r.eps_t_max)?;
            d.set_item("r_pod", r.r_pod)?;
            d.set_item("r_ei", r.r_ei)?;
            d.set_item("iterations", r.iterations)?;
            d.set_item("offline_s", r.offline_s)?;
            d.set_item("speedup", r.speedup)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn rbm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyTrainingSet>()?;
    m.add_class::<PyOutcome>()?;
    m.add_function(wrap_pyfunction!(run_scheme, m)?)?;
    m.add_function(wrap_pyfunction!(select, m)?)?;
    m.add_function(wrap_pyfunction!(deim, m)?)?;
    m.add_function(wrap_pyfunction!(toy_snapshots, m)?)?;
    m.add_function(wrap_pyfunction!(write_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(read_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
