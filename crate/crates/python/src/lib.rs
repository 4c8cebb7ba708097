//! Python bindings for the `qivif` fusion library.
//!
//! Matrices cross the boundary as lists of `(a, b, c, d)` tuples in row-major
//! order; file-level entry points take and return paths.

use std::path::PathBuf;

use pyo3::exceptions::{PyFileNotFoundError, PyIOError, PyIndexError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qivif_core::config::PipelineConfig;
use qivif_core::metrics::MetricReport;
use qivif_core::pipeline::{fuse_files as fuse_files_impl, run_batch as run_batch_impl, FuseOptions};
use qivif_core::proxops::{self, ShrinkParams, Weights};
use qivif_core::quat::{self, NormKind, Quaternion};
use qivif_core::Error;

type Tuple4 = (f64, f64, f64, f64);

fn to_py(err: Error) -> PyErr {
    let msg = err.to_string();
    match err {
        Error::MissingInput(_) => PyFileNotFoundError::new_err(msg),
        Error::Io { .. } | Error::Image { .. } => PyIOError::new_err(msg),
        Error::NonFinite(_) | Error::PairMismatch { .. } | Error::Solve(_) => PyRuntimeError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn quat_of(t: Tuple4) -> Quaternion {
    Quaternion::new(t.0, t.1, t.2, t.3)
}

fn tuple_of(q: Quaternion) -> Tuple4 {
    (q.a, q.b, q.c, q.d)
}

/// Dense quaternion matrix.
#[pyclass(name = "QuaternionMatrix", module = "qivif", from_py_object)]
#[derive(Clone)]
pub struct PyQuaternionMatrix {
    inner: quat::QuaternionMatrix,
}

impl From<quat::QuaternionMatrix> for PyQuaternionMatrix {
    fn from(inner: quat::QuaternionMatrix) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyQuaternionMatrix {
    #[new]
    fn new(rows: usize, cols: usize, data: Vec<Tuple4>) -> PyResult<Self> {
        let data = data.into_iter().map(quat_of).collect();
        quat::QuaternionMatrix::from_vec(rows, cols, data).map(Self::from).map_err(to_py)
    }

    #[staticmethod]
    fn zeros(rows: usize, cols: usize) -> Self {
        quat::QuaternionMatrix::zeros(rows, cols).into()
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        quat::QuaternionMatrix::identity(n).into()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    fn to_list(&self) -> Vec<Tuple4> {
        self.inner.as_slice().iter().copied().map(tuple_of).collect()
    }

    fn __getitem__(&self, idx: (usize, usize)) -> PyResult<Tuple4> {
        let (rows, cols) = self.inner.shape();
        if idx.0 >= rows || idx.1 >= cols {
            return Err(PyIndexError::new_err(format!("{idx:?} outside {rows}x{cols}")));
        }
        Ok(tuple_of(self.inner[idx]))
    }

    fn __setitem__(&mut self, idx: (usize, usize), value: Tuple4) -> PyResult<()> {
        let (rows, cols) = self.inner.shape();
        if idx.0 >= rows || idx.1 >= cols {
            return Err(PyIndexError::new_err(format!("{idx:?} outside {rows}x{cols}")));
        }
        self.inner[idx] = quat_of(value);
        Ok(())
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.inner.check_same_shape(&other.inner, "right operand").map_err(to_py)?;
        Ok((&self.inner + &other.inner).into())
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.inner.check_same_shape(&other.inner, "right operand").map_err(to_py)?;
        Ok((&self.inner - &other.inner).into())
    }

    fn __matmul__(&self, other: &Self) -> PyResult<Self> {
        self.inner.matmul(&other.inner).map(Self::from).map_err(to_py)
    }

    fn matmul(&self, other: &Self) -> PyResult<Self> {
        self.__matmul__(other)
    }

    fn scale(&self, s: f64) -> Self {
        self.inner.scale(s).into()
    }

    fn conj_transpose(&self) -> Self {
        self.inner.conj_transpose().into()
    }

    /// `kind` is one of "fro", "l1", "nuclear".
    #[pyo3(signature = (kind = "fro"))]
    fn norm(&self, kind: &str) -> PyResult<f64> {
        let k = match kind {
            "fro" => NormKind::Fro,
            "l1" => NormKind::L1,
            "nuclear" => NormKind::Nuclear,
            other => return Err(PyValueError::new_err(format!("unknown norm `{other}`"))),
        };
        Ok(self.inner.norm(k))
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        let (r, c) = self.inner.shape();
        format!("QuaternionMatrix({r}x{c})")
    }
}

/// Quaternion SVD: returns `(U, s, V)` with `A = U·diag(s)·Vᴴ`.
#[pyfunction]
fn qsvd(a: &PyQuaternionMatrix) -> PyResult<(PyQuaternionMatrix, Vec<f64>, PyQuaternionMatrix)> {
    let r = quat::qsvd(&a.inner).map_err(to_py)?;
    Ok((r.u.into(), r.s, r.v.into()))
}

#[pyfunction]
fn gst_scalar(sigma: f64, lam: f64, w: f64, p: f64) -> PyResult<f64> {
    proxops::gst_scalar(sigma, lam, w, p).map_err(to_py)
}

#[pyfunction]
fn soft_threshold_columns(y: &PyQuaternionMatrix, tau: f64) -> PyQuaternionMatrix {
    proxops::soft_threshold_columns(&y.inner, tau).into()
}

/// Partial-sum weighted Schatten-p shrinkage. `weights=None` uses `1/(σ+1e-4)`.
#[pyfunction]
#[pyo3(signature = (y, lam, p, n, weights = None))]
fn pssv_wsp_shrink(
    y: &PyQuaternionMatrix,
    lam: f64,
    p: f64,
    n: usize,
    weights: Option<Vec<f64>>,
) -> PyResult<PyQuaternionMatrix> {
    let params = ShrinkParams {
        lambda: lam,
        p,
        n,
        weights: weights.map_or_else(Weights::default, Weights::PerValue),
    };
    proxops::pssv_wsp_shrink(&y.inner, &params).map(Into::into).map_err(to_py)
}

fn load_config(config: Option<PathBuf>, overrides: Vec<String>) -> PyResult<PipelineConfig> {
    PipelineConfig::load(config.as_deref(), &overrides).map_err(to_py)
}

fn report_dict<'py>(py: Python<'py>, r: &MetricReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (k, v) in ["sd", "sf", "ag", "mi", "en", "qabf"].iter().zip(r.values()) {
        d.set_item(k, v)?;
    }
    Ok(d)
}

/// Resolved configuration as TOML text.
#[pyfunction]
#[pyo3(signature = (config = None, overrides = Vec::new()))]
fn resolved_config(config: Option<PathBuf>, overrides: Vec<String>) -> PyResult<String> {
    Ok(load_config(config, overrides)?.to_toml())
}

/// Fuse one pair; returns `{"fused": path, "metrics": dict | None}`.
#[pyfunction]
#[pyo3(signature = (vis, ir, out_dir, config = None, overrides = Vec::new(), metrics = false, dump_intermediates = false))]
#[allow(clippy::too_many_arguments)]
fn fuse_files<'py>(
    py: Python<'py>,
    vis: PathBuf,
    ir: PathBuf,
    out_dir: PathBuf,
    config: Option<PathBuf>,
    overrides: Vec<String>,
    metrics: bool,
    dump_intermediates: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = load_config(config, overrides)?;
    let opts = FuseOptions {
        dump_intermediates,
        metrics,
    };
    let outcome = py
        .detach(|| fuse_files_impl(&vis, &ir, &out_dir, &cfg, &opts))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("fused", outcome.fused_path)?;
    match outcome.metrics {
        Some(r) => d.set_item("metrics", report_dict(py, &r)?)?,
        None => d.set_item("metrics", py.None())?,
    }
    Ok(d)
}

/// Metrics of a fused image against its sources, all given as PNG paths.
#[pyfunction]
fn compute_metrics<'py>(py: Python<'py>, fused: PathBuf, vis: PathBuf, ir: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let f = qivif_core::imgcodec::read_rgb(&fused).map_err(to_py)?;
    let v = qivif_core::imgcodec::read_rgb(&vis).map_err(to_py)?;
    let i = qivif_core::imgcodec::read_gray(&ir).map_err(to_py)?;
    let r = qivif_core::metrics::compute_metrics(&f, &v, &i).map_err(to_py)?;
    report_dict(py, &r)
}

/// Run a manifest; returns `(csv_path, number_fused, number_failed)`.
#[pyfunction]
#[pyo3(signature = (manifest, out_dir, config = None, overrides = Vec::new()))]
fn run_batch(
    py: Python<'_>,
    manifest: PathBuf,
    out_dir: PathBuf,
    config: Option<PathBuf>,
    overrides: Vec<String>,
) -> PyResult<(PathBuf, usize, usize)> {
    let cfg = load_config(config, overrides)?;
    let out = py.detach(|| run_batch_impl(&manifest, &out_dir, &cfg)).map_err(to_py)?;
    Ok((out.csv_path, out.rows.len(), out.failures.len()))
}

#[pymodule]
#[pyo3(name = "qivif")]
pub fn qivif_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQuaternionMatrix>()?;
    m.add_function(wrap_pyfunction!(qsvd, m)?)?;
    m.add_function(wrap_pyfunction!(gst_scalar, m)?)?;
    m.add_function(wrap_pyfunction!(soft_threshold_columns, m)?)?;
    m.add_function(wrap_pyfunction!(pssv_wsp_shrink, m)?)?;
    m.add_function(wrap_pyfunction!(resolved_config, m)?)?;
    m.add_function(wrap_pyfunction!(fuse_files, m)?)?;
    m.add_function(wrap_pyfunction!(compute_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(run_batch, m)?)?;
    m.add("CSV_HEADER", qivif_core::metrics::CSV_HEADER)?;
    Ok(())
}
