//! Python module `oscnet_py`.
//!
//! Reports cross the boundary as JSON text; decode them with `json.loads`.

use oscnet::config::ExperimentConfig;
use oscnet::diagnostics::gaussian_stationary_covariance;
use oscnet::graph::{builtin_fixture, controls, NetworkTopology, FIXTURE_NAMES};
use oscnet::runner;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

/// `(exit_code, report_json, [(file_name, csv_text)])`
type RunResult = (i32, String, Vec<(String, String)>);

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn control_json(t: &NetworkTopology) -> String {
    let r = controls(t);
    serde_json::json!({
        "controlled": r.controlled,
        "connected": r.connected,
        "names": t.names(),
        "depth": r.depth.iter().map(|d| d.level()).collect::<Vec<_>>(),
        "growth": r.growth,
    })
    .to_string()
}

/// Names of the built-in topologies.
#[pyfunction]
fn fixture_names() -> Vec<&'static str> {
    FIXTURE_NAMES.to_vec()
}

/// Control report of a built-in topology; `depth` is `None` where uncontrolled.
#[pyfunction]
fn fixture_controls(name: &str) -> PyResult<String> {
    Ok(control_json(&builtin_fixture(name).map_err(value_error)?))
}

/// Control report of an undirected graph on vertices `0..vertex_count`.
#[pyfunction]
fn graph_controls(vertex_count: usize, edges: Vec<(usize, usize)>, baths: Vec<usize>) -> PyResult<String> {
    Ok(control_json(&NetworkTopology::new(vertex_count, &edges, &baths).map_err(value_error)?))
}

/// Runs an experiment configuration given as JSON text.
///
/// Returns `(exit_code, report_json, tables)` with `tables` a list of
/// `(file_name, csv_text)` pairs. Nothing is written to disk.
#[pyfunction]
#[pyo3(signature = (config_json, seed=None))]
fn run_config(py: Python<'_>, config_json: &str, seed: Option<u64>) -> PyResult<RunResult> {
    let mut config = ExperimentConfig::from_json(config_json).map_err(value_error)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let outcome = py.detach(|| runner::execute(&config));
    Ok((outcome.status.exit_code(), outcome.report.to_string(), outcome.tables))
}

/// Stationary covariance of a fully quadratic model, `(p, q)` ordering.
#[pyfunction]
fn stationary_covariance(config_json: &str) -> PyResult<Vec<Vec<f64>>> {
    let config = ExperimentConfig::from_json(config_json).map_err(value_error)?;
    let model = config
        .model()
        .map_err(value_error)?
        .ok_or_else(|| value_error("configuration has no model section"))?;
    let s = gaussian_stationary_covariance(&model).map_err(value_error)?.covariance;
    Ok((0..s.nrows()).map(|i| s.row(i).iter().copied().collect()).collect())
}

#[pymodule]
fn oscnet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(fixture_names, m)?)?;
    m.add_function(wrap_pyfunction!(fixture_controls, m)?)?;
    m.add_function(wrap_pyfunction!(graph_controls, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_covariance, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
