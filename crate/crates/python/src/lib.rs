//! Python module `jxeskit`: read, write, convert, validate and generate
//! event logs from Python.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use jxeskit_core as core;
use jxeskit_core::io::{encode_log, read_log, write_log};
use jxeskit_core::{BackendKind, GenProfile, LogFormat, ParseOptions};

create_exception!(jxeskit, JxesError, PyValueError, "Raised for malformed or invalid logs.");

fn to_py(err: core::Error) -> PyErr {
    if err.is_io() {
        PyOSError::new_err(err.to_string())
    } else {
        JxesError::new_err(format!("{}: {err}", err.code()))
    }
}

fn backend(name: &str) -> PyResult<BackendKind> {
    name.parse().map_err(PyValueError::new_err)
}

fn format_of(path: &std::path::Path, given: Option<&str>) -> PyResult<LogFormat> {
    match given {
        Some(f) => f.parse().map_err(PyValueError::new_err),
        None => LogFormat::from_path(path)
            .ok_or_else(|| PyValueError::new_err(format!("cannot infer the format of {}", path.display()))),
    }
}

/// An event log: log attributes, globals, classifiers, extensions and traces.
#[pyclass(name = "EventLog", module = "jxeskit", frozen)]
pub struct PyEventLog {
    inner: core::EventLog,
}

#[pymethods]
impl PyEventLog {
    /// An empty log.
    #[new]
    fn new() -> Self {
        PyEventLog {
            inner: core::EventLog::new(),
        }
    }

    /// Reads a log file; the format follows the file name unless given.
    #[staticmethod]
    #[pyo3(signature = (path, backend="tree", strict=false, format=None))]
    fn read(py: Python<'_>, path: PathBuf, backend: &str, strict: bool, format: Option<&str>) -> PyResult<Self> {
        let opts = ParseOptions::new(self::backend(backend)?).strict(strict);
        let format = format_of(&path, format)?;
        let (inner, _) = py.detach(|| read_log(&path, format, &opts)).map_err(to_py)?;
        Ok(PyEventLog { inner })
    }

    /// Parses JXES text or bytes (gzip bytes are accepted too).
    #[staticmethod]
    #[pyo3(signature = (data, backend="tree", strict=false))]
    fn from_jxes(data: &Bound<'_, PyAny>, backend: &str, strict: bool) -> PyResult<Self> {
        let opts = ParseOptions::new(self::backend(backend)?).strict(strict);
        let bytes = input_bytes(data)?;
        let inner = core::parse_jxes(&bytes[..], &opts).map_err(to_py)?;
        Ok(PyEventLog { inner })
    }

    /// Parses XES text or bytes.
    #[staticmethod]
    fn from_xes(data: &Bound<'_, PyAny>) -> PyResult<Self> {
        let bytes = input_bytes(data)?;
        let (inner, _) = core::parse_xes(&bytes[..]).map_err(to_py)?;
        Ok(PyEventLog { inner })
    }

    #[pyo3(signature = (backend="streaming", pretty=false))]
    fn to_jxes(&self, backend: &str, pretty: bool) -> PyResult<String> {
        let bytes = core::jxes::to_jxes_vec(&self.inner, self::backend(backend)?, pretty).map_err(to_py)?;
        Ok(String::from_utf8(bytes).expect("writer emits UTF-8"))
    }

    fn to_xes(&self) -> PyResult<String> {
        let bytes = core::xes::to_xes_vec(&self.inner, &core::XesDocumentMeta::standard()).map_err(to_py)?;
        Ok(String::from_utf8(bytes).expect("writer emits UTF-8"))
    }

    /// Canonical compact JXES bytes.
    fn canonical<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyBytes>> {
        let bytes = core::canonicalize(&self.inner).map_err(to_py)?;
        Ok(PyBytes::new(py, &bytes))
    }

    /// Serialized bytes in a format such as "JXES-gz" or "XES".
    #[pyo3(signature = (format, backend="streaming"))]
    fn encode<'py>(&self, py: Python<'py>, format: &str, backend: &str) -> PyResult<Bound<'py, PyBytes>> {
        let format: LogFormat = format.parse().map_err(PyValueError::new_err)?;
        let bytes = encode_log(&self.inner, format, self::backend(backend)?).map_err(to_py)?;
        Ok(PyBytes::new(py, &bytes))
    }

    /// Writes the log atomically; returns the file size.
    #[pyo3(signature = (path, backend="streaming", format=None))]
    fn save(&self, py: Python<'_>, path: PathBuf, backend: &str, format: Option<&str>) -> PyResult<u64> {
        let format = format_of(&path, format)?;
        let backend = self::backend(backend)?;
        py.detach(|| write_log(&self.inner, &path, format, backend)).map_err(to_py)
    }

    /// Trace, event, variant and activity counts as a dict.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = core::log_statistics(&self.inner);
        let d = PyDict::new(py);
        d.set_item("traces", s.trace_count)?;
        d.set_item("events", s.event_count)?;
        d.set_item("variants", s.variant_count)?;
        d.set_item("activities", s.distinct_activities)?;
        d.set_item("max_trace_length", s.max_trace_length)?;
        Ok(d)
    }

    fn equivalent(&self, other: &PyEventLog) -> bool {
        core::logs_equivalent(&self.inner, &other.inner)
    }

    fn __eq__(&self, other: &Bound<'_, PyAny>) -> bool {
        other
            .cast::<PyEventLog>()
            .is_ok_and(|o| core::logs_equivalent(&self.inner, &o.get().inner))
    }

    #[getter]
    fn trace_count(&self) -> usize {
        self.inner.traces.len()
    }

    #[getter]
    fn event_count(&self) -> usize {
        self.inner.event_count()
    }

    fn __len__(&self) -> usize {
        self.inner.traces.len()
    }

    fn __repr__(&self) -> String {
        format!("EventLog({})", core::log_statistics(&self.inner))
    }
}

fn input_bytes(data: &Bound<'_, PyAny>) -> PyResult<Vec<u8>> {
    if let Ok(b) = data.cast::<PyBytes>() {
        return Ok(b.as_bytes().to_vec());
    }
    let s: String = data.extract()?;
    Ok(s.into_bytes())
}

/// Validates a JXES document and returns its diagnostics as dicts with
/// `severity`, `code`, `json_path` and `message`.
#[pyfunction]
fn validate<'py>(py: Python<'py>, data: &Bound<'py, PyAny>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let bytes = input_bytes(data)?;
    core::validate_document(&bytes)
        .into_iter()
        .map(|d| {
            let out = PyDict::new(py);
            out.set_item("severity", d.severity.to_string())?;
            out.set_item("code", d.code)?;
            out.set_item("json_path", d.json_path)?;
            out.set_item("message", d.message)?;
            Ok(out)
        })
        .collect()
}

/// Generates a synthetic log from a preset name or a JSON profile.
#[pyfunction]
#[pyo3(signature = (preset=None, profile=None, seed=None, traces=None))]
fn generate(
    py: Python<'_>,
    preset: Option<&str>,
    profile: Option<&str>,
    seed: Option<u64>,
    traces: Option<usize>,
) -> PyResult<PyEventLog> {
    let mut p = match (preset, profile) {
        (Some(_), Some(_)) => return Err(PyValueError::new_err("give either preset or profile, not both")),
        (Some(name), None) => {
            GenProfile::preset(name).ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}")))?
        }
        (None, Some(json)) => serde_json::from_str(json).map_err(|e| PyValueError::new_err(e.to_string()))?,
        (None, None) => GenProfile::default(),
    };
    if let Some(s) = seed {
        p.seed = s;
    }
    if let Some(t) = traces {
        p.traces = t;
    }
    let inner = py.detach(|| core::generate(&p)).map_err(to_py)?;
    Ok(PyEventLog { inner })
}

/// Converts between file formats chosen by extension.
#[pyfunction]
#[pyo3(signature = (src, dst, backend="tree", strict=false))]
fn convert(py: Python<'_>, src: PathBuf, dst: PathBuf, backend: &str, strict: bool) -> PyResult<u64> {
    let opts = ParseOptions::new(self::backend(backend)?).strict(strict);
    let (in_format, out_format) = (format_of(&src, None)?, format_of(&dst, None)?);
    py.detach(|| {
        let (log, _) = read_log(&src, in_format, &opts)?;
        write_log(&log, &dst, out_format, opts.backend)
    })
    .map_err(to_py)
}

#[pymodule]
fn jxeskit(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("JxesError", m.py().get_type::<JxesError>())?;
    m.add_class::<PyEventLog>()?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(convert, m)?)?;
    Ok(())
}
