//! Python bindings: step functions, sup distances and config-driven
//! experiments.

use std::path::PathBuf;

use idslab::convergence::{sup_distance as exact_sup_distance, AnalyticIds};
use idslab::jumps::{jump_sandwich, Mode};
use idslab::models::build_operator;
use idslab::spectra::{normalized_counting, restrict};
use idslab::Level;
use idslab_cli::config::{self, ExperimentConfig};
use idslab_cli::pipeline::{self, RunError};
use idslab_cli::validate::{build_boxes, build_carrier, validate};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(mode: Option<&str>, default: Mode) -> PyResult<Mode> {
    mode.map_or(Ok(default), |m| m.parse().map_err(value_error))
}

/// Right-continuous nondecreasing step function.
#[pyclass(name = "StepFunction", module = "idslab_py")]
pub struct PyStepFunction {
    inner: idslab::spectra::StepFunction,
}

#[pymethods]
impl PyStepFunction {
    #[new]
    fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        let inner = idslab::spectra::StepFunction::from_parts(breakpoints, values).map_err(value_error)?;
        Ok(PyStepFunction { inner })
    }

    /// Distribution function of the atoms `[(location, mass), ...]`.
    #[staticmethod]
    fn from_atoms(atoms: Vec<(f64, f64)>) -> PyResult<Self> {
        let inner = idslab::spectra::StepFunction::from_atoms(atoms).map_err(value_error)?;
        Ok(PyStepFunction { inner })
    }

    fn __call__(&self, x: f64) -> f64 {
        self.inner.eval(x)
    }

    fn left_limit(&self, x: f64) -> f64 {
        self.inner.left_limit(x)
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    #[getter]
    fn breakpoints(&self) -> Vec<f64> {
        self.inner.breakpoints().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        self.inner.atoms()
    }

    fn to_csv(&self) -> String {
        idslab::io::step_function_to_csv(&self.inner)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        let inner = idslab::io::step_function_from_csv(text).map_err(value_error)?;
        Ok(PyStepFunction { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.breakpoints().len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("StepFunction(breakpoints={}, total_mass={})", self.inner.breakpoints().len(), self.inner.total_mass())
    }
}

/// Exact `sup |f − g|`.
#[pyfunction]
pub fn sup_distance(f: &PyStepFunction, g: &PyStepFunction) -> f64 {
    exact_sup_distance(&f.inner, &g.inner)
}

/// `arccos(−λ/2)/π` clamped to `[0, 1]`: the IDS of the free chain.
#[pyfunction]
pub fn free_chain_ids(lam: f64) -> f64 {
    AnalyticIds::FreeChain1d.eval(lam)
}

/// `(label, value, is_rational)` for a level such as `"1/2"` or `"-sqrt(2)"`.
#[pyfunction]
pub fn parse_level(text: &str) -> PyResult<(String, f64, bool)> {
    let level = Level::parse(text).map_err(value_error)?;
    Ok((level.label().to_string(), level.value(), level.is_rational()))
}

/// An experiment described by config text in the `idslab` CLI format.
#[pyclass(name = "Experiment", module = "idslab_py")]
pub struct PyExperiment {
    cfg: ExperimentConfig,
}

impl PyExperiment {
    fn window(&self, n: usize) -> PyResult<(std::sync::Arc<idslab::geometry::PointSet>, idslab::geometry::FolnerBox)> {
        if !self.cfg.windows.contains(&n) {
            return Err(PyValueError::new_err(format!("n = {n} is not in windows.n {:?}", self.cfg.windows)));
        }
        let carrier = build_carrier(&self.cfg).map_err(value_error)?;
        let boxes = build_boxes(&self.cfg, &carrier).map_err(value_error)?;
        let bx = boxes.into_iter().find(|b| b.n == n).expect("n is configured");
        Ok((carrier, bx))
    }
}

#[pymethods]
impl PyExperiment {
    #[new]
    fn new(config_text: &str) -> PyResult<Self> {
        Ok(PyExperiment { cfg: config::parse(config_text).map_err(value_error)? })
    }

    #[staticmethod]
    fn from_file(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| value_error(format!("{}: {e}", path.display())))?;
        Self::new(&text)
    }

    #[getter]
    fn name(&self) -> String {
        self.cfg.name.clone()
    }

    #[getter]
    fn windows(&self) -> Vec<usize> {
        self.cfg.windows.clone()
    }

    #[getter]
    fn seeds(&self) -> Vec<u64> {
        self.cfg.seed_list()
    }

    /// Diagnostics as printed by `idslab validate`.
    #[pyo3(signature = (mode=None))]
    fn validate(&self, mode: Option<&str>) -> PyResult<Vec<String>> {
        let mode = parse_mode(mode, self.cfg.mode)?;
        Ok(validate(&self.cfg, mode).iter().map(|d| d.to_string()).collect())
    }

    /// Normalized counting function of one realization on the size-`n` window.
    fn counting(&self, n: usize, seed: u64) -> PyResult<PyStepFunction> {
        let (carrier, bx) = self.window(n)?;
        let op = build_operator(&self.cfg.model, carrier, seed).map_err(value_error)?;
        let rop = restrict(&op, &bx).map_err(value_error)?;
        let inner = normalized_counting(&rop, self.cfg.normalizer).map_err(value_error)?;
        Ok(PyStepFunction { inner })
    }

    /// Jump sandwich at level `lam` as a dict with the `jumps.csv` columns.
    #[pyo3(signature = (n, seed, lam, mode=None))]
    fn jump<'py>(&self, py: Python<'py>, n: usize, seed: u64, lam: &str, mode: Option<&str>) -> PyResult<Bound<'py, PyDict>> {
        let mode = parse_mode(mode, self.cfg.mode)?;
        let level = Level::parse(lam).map_err(value_error)?;
        let (carrier, bx) = self.window(n)?;
        let op = build_operator(&self.cfg.model, carrier, seed).map_err(value_error)?;
        let est = jump_sandwich(&op, &bx, &level, mode).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let d = PyDict::new(py);
        d.set_item("lambda", est.lambda)?;
        d.set_item("n", est.n)?;
        d.set_item("seed", est.seed)?;
        d.set_item("D", est.compact_dim)?;
        d.set_item("atom_count", est.atom_count)?;
        d.set_item("boundary_budget", est.boundary_budget)?;
        d.set_item("active", est.active)?;
        d.set_item("lower", est.lower)?;
        d.set_item("upper", est.upper)?;
        Ok(d)
    }

    /// Runs the whole pipeline into `out` and returns the manifest hash.
    #[pyo3(signature = (out, mode=None))]
    fn run(&self, out: PathBuf, mode: Option<&str>) -> PyResult<String> {
        let mode = parse_mode(mode, self.cfg.mode)?;
        match pipeline::run(&self.cfg, mode, &out) {
            Ok(outcome) => Ok(outcome.manifest_hash),
            Err(RunError::Config(diags)) => {
                Err(value_error(diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")))
            }
            Err(e) => Err(PyRuntimeError::new_err(e.to_string())),
        }
    }

    fn __repr__(&self) -> String {
        format!("Experiment(name={:?}, windows={:?}, seeds={})", self.cfg.name, self.cfg.windows, self.cfg.seeds)
    }
}

#[pymodule]
fn idslab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStepFunction>()?;
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(sup_distance, m)?)?;
    m.add_function(wrap_pyfunction!(free_chain_ids, m)?)?;
    m.add_function(wrap_pyfunction!(parse_level, m)?)?;
    Ok(())
}
