//! Python bindings for the daysift toolkit.
//!
//! Exposes corpus loading and synthesis, per-day signature building, the
//! isolation-forest detector with contamination thresholding, the metric
//! report, and the full experiment runner. Build with
//! `cargo build -p daysift-py --release` and rename the produced cdylib to
//! `daysift_py.so` (see `python/smoke_test.py`, which automates this).

use std::path::PathBuf;
use std::str::FromStr;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;

use daysift::dataset::synth::{generate, SyntheticConfig};
use daysift::dataset::{load_corpus, write_corpus, Label, StudyDataset, UserDays};
use daysift::daysig::{activity_histogram, build_signatures};
use daysift::iforest::{IsoForest, IsoForestParams};
use daysift::runner::{run_experiments, RunConfig, RunManifest};
use daysift::FeatureMode;

fn err(e: daysift::Error) -> PyErr {
    let msg = e.to_string();
    match e {
        daysift::Error::Io(_) => PyIOError::new_err(msg),
        daysift::Error::NonConvergence { .. } | daysift::Error::Degenerate(_) => {
            PyRuntimeError::new_err(msg)
        }
        _ => PyValueError::new_err(msg),
    }
}

fn parse_label(code: &str) -> PyResult<Label> {
    Label::from_code(code).ok_or_else(|| {
        PyValueError::new_err(format!("unknown label code '{code}' (expected 'R' or 'N')"))
    })
}

fn parse_mode(mode: &str) -> PyResult<FeatureMode> {
    FeatureMode::from_str(mode).map_err(err)
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    match v {
        Value::Null => Ok(py.None()),
        Value::Bool(b) => b.into_py_any(py),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else if let Some(u) = n.as_u64() {
                u.into_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py_any(py)
            }
        }
        Value::String(s) => s.into_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            Ok(list.into_any().unbind())
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            Ok(dict.into_any().unbind())
        }
    }
}

/// A study corpus: per-user day records with activity scores, optional
/// global features and (partial) ground-truth labels.
#[pyclass(frozen)]
struct Dataset {
    inner: StudyDataset,
}

impl Dataset {
    fn user(&self, id: &str) -> PyResult<&UserDays> {
        self.inner
            .user(id)
            .ok_or_else(|| PyValueError::new_err(format!("unknown user '{id}'")))
    }
}

#[pymethods]
impl Dataset {
    /// Loads a corpus directory (one CSV per user-day plus labels files).
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Dataset> {
        Ok(Dataset {
            inner: load_corpus(&path).map_err(err)?,
        })
    }

    /// Generates a synthetic corpus from generator TOML text.
    #[staticmethod]
    #[pyo3(signature = (config_toml, seed=None))]
    fn synth(config_toml: &str, seed: Option<u64>) -> PyResult<Dataset> {
        let mut cfg: SyntheticConfig =
            toml::from_str(config_toml).map_err(|e| PyValueError::new_err(e.to_string()))?;
        if let Some(seed) = seed {
            cfg.seed = seed;
        }
        Ok(Dataset {
            inner: generate(&cfg).map_err(err)?,
        })
    }

    /// Writes the corpus in the on-disk directory layout `load` reads.
    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_corpus(&path, &self.inner).map_err(err)
    }

    /// Width of the global feature block (0 when absent).
    #[getter]
    fn n_globals(&self) -> usize {
        self.inner.n_globals
    }

    fn n_days(&self) -> usize {
        self.inner.n_days()
    }

    fn users(&self) -> Vec<String> {
        self.inner.users.iter().map(|u| u.user_id.clone()).collect()
    }

    /// ISO dates of one user's recorded days, in order.
    fn dates(&self, user: &str) -> PyResult<Vec<String>> {
        Ok(self
            .user(user)?
            .days
            .iter()
            .map(|d| d.date.to_string())
            .collect())
    }

    /// Ground-truth codes per day: 'R', 'N', or None when unlabelled.
    fn labels(&self, user: &str) -> PyResult<Vec<Option<&'static str>>> {
        Ok(self
            .user(user)?
            .days
            .iter()
            .map(|d| d.label.map(Label::as_code))
            .collect())
    }

    /// One feature vector per day for `user`.
    ///
    /// `mode` is 'act', 'glo' or 'act-glo'; `standardize=None` applies the
    /// mode's default (z-scores only for 'act-glo').
    #[pyo3(signature = (user, mode="act", standardize=None))]
    fn signatures(
        &self,
        user: &str,
        mode: &str,
        standardize: Option<bool>,
    ) -> PyResult<Vec<Vec<f64>>> {
        let mode = parse_mode(mode)?;
        let all = build_signatures(&self.inner, mode, standardize).map_err(err)?;
        all.iter()
            .find(|s| s.user_id == user)
            .map(|s| s.feature_matrix())
            .ok_or_else(|| PyValueError::new_err(format!("unknown user '{user}'")))
    }

    /// Per-day occurrence fractions of each activity class (argmax over
    /// each image), as drawn in the activity plots.
    fn activity_histograms(&self, user: &str) -> PyResult<Vec<Vec<f64>>> {
        Ok(self.user(user)?.days.iter().map(activity_histogram).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(users={}, days={}, n_globals={})",
            self.inner.users.len(),
            self.inner.n_days(),
            self.inner.n_globals
        )
    }
}

/// Isolation forest anomaly detector over per-day feature vectors.
#[pyclass(frozen)]
struct IsolationForest {
    inner: IsoForest,
}

impl IsolationForest {
    fn check_dims(&self, x: &[f64]) -> PyResult<()> {
        if x.len() != self.inner.n_features() {
            return Err(PyValueError::new_err(format!(
                "expected {} features, got {}",
                self.inner.n_features(),
                x.len()
            )));
        }
        Ok(())
    }
}

#[pymethods]
impl IsolationForest {
    #[new]
    #[pyo3(signature = (data, n_trees=100, subsample_size=256, seed=0))]
    fn new(data: Vec<Vec<f64>>, n_trees: usize, subsample_size: usize, seed: u64) -> PyResult<Self> {
        let inner = IsoForest::fit(
            &data,
            IsoForestParams {
                n_trees,
                subsample_size,
                seed,
            },
        )
        .map_err(err)?;
        Ok(IsolationForest { inner })
    }

    /// Anomaly score in (0, 1]; higher means more isolated.
    fn score(&self, point: Vec<f64>) -> PyResult<f64> {
        self.check_dims(&point)?;
        Ok(self.inner.score(&point))
    }

    fn score_samples(&self, data: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        for p in &data {
            self.check_dims(p)?;
        }
        Ok(self.inner.score_samples(&data))
    }

    /// Average tree depth at which `point` isolates.
    fn path_length(&self, point: Vec<f64>) -> PyResult<f64> {
        self.check_dims(&point)?;
        Ok(self.inner.path_length(&point))
    }

    /// Serializes the fitted forest as a versioned JSON document.
    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<IsolationForest> {
        Ok(IsolationForest {
            inner: IsoForest::from_json(text).map_err(err)?,
        })
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    fn __repr__(&self) -> String {
        format!("IsolationForest(n_features={})", self.inner.n_features())
    }
}

/// Expected path-length normalizer c(m) for a subsample of size m.
#[pyfunction]
fn average_path_length(m: usize) -> f64 {
    daysift::iforest::average_path_length(m)
}

/// Anomaly score 2^(-e/c) from a path length and its normalizer.
#[pyfunction]
fn score_from_path(e: f64, c: f64) -> f64 {
    daysift::iforest::score_from_path(e, c)
}

/// Flags the highest-scoring `floor(contamination * n)` points (ties with
/// the cut-off score included). Returns `{'scores', 'flagged', 'threshold'}`.
#[pyfunction]
#[pyo3(signature = (scores, contamination=0.3))]
fn decide(py: Python<'_>, scores: Vec<f64>, contamination: f64) -> PyResult<Py<PyAny>> {
    let outcome = daysift::iforest::decide(&scores, contamination).map_err(err)?;
    let dict = PyDict::new(py);
    dict.set_item("scores", outcome.scores)?;
    dict.set_item("flagged", outcome.flagged)?;
    dict.set_item("threshold", outcome.threshold)?;
    Ok(dict.into_any().unbind())
}

/// Two-class report for label code sequences ('R'/'N'): accuracy, per-class
/// precision/recall/F1, macro and support-weighted averages, confusion counts.
#[pyfunction]
fn evaluate(py: Python<'_>, ground_truth: Vec<String>, predicted: Vec<String>) -> PyResult<Py<PyAny>> {
    let gt: Vec<Label> = ground_truth
        .iter()
        .map(|c| parse_label(c))
        .collect::<PyResult<_>>()?;
    let pred: Vec<Label> = predicted
        .iter()
        .map(|c| parse_label(c))
        .collect::<PyResult<_>>()?;
    let report = daysift::eval::evaluate(&gt, &pred).map_err(err)?;
    let value = serde_json::to_value(report).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &value)
}

/// Resolves one day's six annotator votes ('R'/'N') into its label code;
/// ties go to 'N'.
#[pyfunction]
fn aggregate_votes(votes: Vec<String>) -> PyResult<&'static str> {
    let votes: Vec<Label> = votes.iter().map(|c| parse_label(c)).collect::<PyResult<_>>()?;
    Ok(daysift::dataset::aggregate_votes(&votes).map_err(err)?.as_code())
}

/// Runs the full detector-by-feature-mode matrix described by run-config
/// TOML text and returns the manifest as a JSON string. Relative corpus
/// paths resolve against `base_dir` (default: the working directory).
#[pyfunction]
#[pyo3(signature = (config_toml, base_dir=None))]
fn run(config_toml: &str, base_dir: Option<PathBuf>) -> PyResult<String> {
    let cfg = RunConfig::from_toml(config_toml).map_err(err)?;
    let base = base_dir.unwrap_or_else(|| PathBuf::from("."));
    let dataset = cfg.load_dataset(&base).map_err(err)?;
    let manifest = run_experiments(&dataset, &cfg.options()).map_err(err)?;
    manifest.to_json().map_err(err)
}

/// Renders a manifest JSON string to the results.csv text.
#[pyfunction]
fn results_csv(manifest_json: &str) -> PyResult<String> {
    Ok(RunManifest::from_json(manifest_json)
        .map_err(err)?
        .render_results_csv())
}

#[pymodule]
fn daysift_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<IsolationForest>()?;
    m.add_function(wrap_pyfunction!(average_path_length, m)?)?;
    m.add_function(wrap_pyfunction!(score_from_path, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate_votes, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(results_csv, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
