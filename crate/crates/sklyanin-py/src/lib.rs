//! Python bindings. Every function returns the same JSON documents the
//! command-line tool prints; rationals go in as strings or ints ("p/q", 3).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use sklyanin_rw::pipeline::{
    classical_report, discover_report, parse_params_list, realize_report, sweep_report,
    verify_report, RunError, DEFAULT_COUNT, DEFAULT_DEGREE_CAP,
};
use sklyanin_rw::realization::SklyaninParams;
use sklyanin_rw::schema::{to_document, SCHEMA_VERSION};

fn value_error(e: RunError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params_from(params: &Bound<'_, PyAny>) -> PyResult<SklyaninParams> {
    if let Ok(s) = params.extract::<String>() {
        return parse_params_list(&s).map_err(value_error);
    }
    let parts: Vec<String> = params
        .try_iter()?
        .map(|x| Ok(x?.str()?.to_string()))
        .collect::<PyResult<_>>()?;
    parse_params_list(&parts.join(",")).map_err(value_error)
}

/// Realization report for six rational parameters.
#[pyfunction]
fn realize(params: &Bound<'_, PyAny>) -> PyResult<String> {
    let p = params_from(params)?;
    let report = realize_report(&p).map_err(value_error)?;
    Ok(to_document(&report.to_json()))
}

#[pyfunction]
fn classical_check(py: Python<'_>) -> String {
    py.detach(|| to_document(&classical_report().to_json()))
}

/// Returns `(report, structure)`; `structure` is None when discovery stopped
/// before a table was built.
#[pyfunction]
#[pyo3(signature = (params, degree_cap = DEFAULT_DEGREE_CAP))]
fn discover(
    py: Python<'_>,
    params: &Bound<'_, PyAny>,
    degree_cap: usize,
) -> PyResult<(String, Option<String>)> {
    let p = params_from(params)?;
    let (report, doc) = py
        .detach(|| discover_report(&p, degree_cap))
        .map_err(value_error)?;
    Ok((
        to_document(&report.to_json()),
        doc.as_ref().map(to_document),
    ))
}

#[pyfunction]
#[pyo3(signature = (document, degree_cap = None))]
fn verify(py: Python<'_>, document: &str, degree_cap: Option<usize>) -> PyResult<String> {
    let report = py
        .detach(|| verify_report(document, degree_cap))
        .map_err(value_error)?;
    Ok(to_document(&report.to_json()))
}

#[pyfunction]
#[pyo3(signature = (seed = 0, count = DEFAULT_COUNT, locus = false, degree_cap = DEFAULT_DEGREE_CAP))]
fn sweep(py: Python<'_>, seed: u64, count: usize, locus: bool, degree_cap: usize) -> String {
    py.detach(|| to_document(&sweep_report(seed, count, locus, degree_cap).to_json()))
}

#[pymodule]
fn sklyanin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SCHEMA_VERSION", SCHEMA_VERSION)?;
    m.add_function(wrap_pyfunction!(realize, m)?)?;
    m.add_function(wrap_pyfunction!(classical_check, m)?)?;
    m.add_function(wrap_pyfunction!(discover, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn module_functions_round_trip() {
        Python::initialize();
        Python::attach(|py| {
            let p = "1,0,1,0,0,1".into_pyobject(py).unwrap().into_any();
            let report: serde_json::Value = serde_json::from_str(&realize(&p).unwrap()).unwrap();
            assert_eq!(report["exit_code"], 0);
            let (_, doc) = discover(py, &p, 3).unwrap();
            let checked: serde_json::Value =
                serde_json::from_str(&verify(py, &doc.unwrap(), None).unwrap()).unwrap();
            assert_eq!(checked["mode"], "verify");
            let bad = "1,0".into_pyobject(py).unwrap().into_any();
            assert!(realize(&bad).is_err());
        });
    }
}
