//! Python bindings: models, experiments, archives and the replication
//! statistics.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use crossdock::error::ArchiveError;
use crossdock::experiment::{self, ExperimentSpec, ModeKind, RunArchive, RunMode, RunReport};
use crossdock::model::{CrossdockModel, ModelVariant, ReplicationResult};
use crossdock::stats::{
    self, dist, ComparisonKind, ComparisonReport, SequentialConfig, SequentialState, SummaryStats,
    DEFAULT_CONFIDENCE,
};
use crossdock::{ConfigError, Error, SimError, StatsError};

fn config_err(e: ConfigError) -> PyErr {
    PyValueError::new_err(format!("configuration error: {e}"))
}

fn stats_err(e: StatsError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sim_err(e: SimError) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn archive_err(e: ArchiveError) -> PyErr {
    match e {
        ArchiveError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(format!("archive error: {other}")),
    }
}

fn core_err(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::ConfigFile { .. } | Error::Stats(_) => PyValueError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_variant(s: &str) -> PyResult<ModelVariant> {
    s.parse().map_err(config_err)
}

fn result_dict<'py>(py: Python<'py>, r: &ReplicationResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("replication", r.replication)?;
    d.set_item("total_usage_cost", r.total_usage_cost)?;
    d.set_item("orders_created", r.orders_created)?;
    d.set_item("orders_disposed", r.orders_disposed)?;
    d.set_item("orders_in_system", r.orders_in_system)?;
    d.set_item("orders_by_type", r.orders_by_type.to_vec())?;
    d.set_item("mean_wait_min", r.mean_wait_min)?;
    d.set_item("mean_queue_len", r.mean_queue_len)?;
    d.set_item("failures", r.failures)?;
    d.set_item("events", r.events)?;
    let ledger = PyList::empty(py);
    for rec in &r.ledger.records {
        let e = PyDict::new(py);
        e.set_item("name", &rec.name)?;
        e.set_item("capacity", rec.capacity)?;
        e.set_item("busy_min", rec.busy_min)?;
        e.set_item("idle_min", rec.idle_min)?;
        e.set_item("overtime_min", rec.overtime_min)?;
        e.set_item("scheduled_min", rec.scheduled_min)?;
        e.set_item("uses", rec.use_count)?;
        ledger.append(e)?;
    }
    d.set_item("ledger", ledger)?;
    Ok(d)
}

fn summary_dict<'py>(py: Python<'py>, s: &SummaryStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n", s.n)?;
    d.set_item("mean", s.mean)?;
    d.set_item("sd", s.sd)?;
    d.set_item("min", s.min)?;
    d.set_item("max", s.max)?;
    d.set_item("half_width", s.half_width)?;
    d.set_item("confidence", s.confidence)?;
    Ok(d)
}

fn report_dict<'py>(py: Python<'py>, r: &RunReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("completed", r.completed)?;
    d.set_item("stop_reason", r.stop_reason.as_str())?;
    d.set_item("summary", r.summary.as_ref().map(|s| summary_dict(py, s)).transpose()?)?;
    d.set_item("wall_time_s", r.elapsed.as_secs_f64())?;
    d.set_item("console_line", r.console_line())?;
    Ok(d)
}

fn comparison_dict<'py>(py: Python<'py>, r: &ComparisonReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item(
        "kind",
        match r.kind {
            ComparisonKind::Means => "means",
            ComparisonKind::Variances => "variances",
        },
    )?;
    d.set_item("identifier", &r.identifier)?;
    d.set_item("estimate", r.estimate)?;
    d.set_item("sd", r.sd)?;
    d.set_item("half_width", r.half_width)?;
    d.set_item("ci_low", r.ci_low)?;
    d.set_item("ci_high", r.ci_high)?;
    d.set_item("alpha", r.alpha)?;
    d.set_item("reject", r.verdict == stats::Verdict::Reject)?;
    d.set_item("verdict", r.verdict_line())?;
    d.set_item("text", r.render_text())?;
    d.set_item("csv_row", r.csv_row())?;
    Ok(d)
}

fn parse_kind(kind: &str) -> PyResult<ComparisonKind> {
    match kind {
        "means" => Ok(ComparisonKind::Means),
        "variances" => Ok(ComparisonKind::Variances),
        other => Err(PyValueError::new_err(format!("kind must be `means` or `variances`, got `{other}`"))),
    }
}

type TraceRow = (f64, &'static str, String, String);

/// A validated crossdock model. Replications are independent of call order.
#[pyclass(name = "Model", module = "crossdock_py", frozen)]
struct PyModel {
    inner: CrossdockModel,
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (variant = "base", length_min = None))]
    fn new(variant: &str, length_min: Option<f64>) -> PyResult<Self> {
        let variant = parse_variant(variant)?;
        let mut spec = ExperimentSpec::for_variant(variant);
        if let Some(len) = length_min {
            spec.model.replication_length_min = len;
        }
        let inner = CrossdockModel::new(variant, spec.model).map_err(config_err)?;
        Ok(Self { inner })
    }

    /// Builds the model described by an experiment TOML document.
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let spec = ExperimentSpec::from_toml(text).map_err(config_err)?;
        let inner = CrossdockModel::new(spec.variant, spec.model).map_err(config_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.inner.variant().as_str()
    }

    #[getter]
    fn stream_mapping(&self) -> String {
        format!("{:?}", self.inner.stream_mapping()).to_lowercase()
    }

    fn resource_names(&self) -> Vec<String> {
        self.inner.resource_names()
    }

    #[pyo3(signature = (seed = 12345, replication = 0))]
    fn run_replication<'py>(&self, py: Python<'py>, seed: u64, replication: u64) -> PyResult<Bound<'py, PyDict>> {
        let r = py.detach(|| self.inner.run_replication(seed, replication)).map_err(sim_err)?;
        result_dict(py, &r)
    }

    /// Runs one replication and returns `(result, trace)`, the trace being a
    /// list of `(time, kind, subject, text)` tuples.
    #[pyo3(signature = (seed = 12345, replication = 0))]
    fn run_traced<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        replication: u64,
    ) -> PyResult<(Bound<'py, PyDict>, Vec<TraceRow>)> {
        let (r, trace) = py.detach(|| self.inner.run_traced(seed, replication)).map_err(sim_err)?;
        let rows = trace.into_iter().map(|e| (e.time, e.kind.as_str(), e.subject, e.text)).collect();
        Ok((result_dict(py, &r)?, rows))
    }

    fn __repr__(&self) -> String {
        format!("Model(variant='{}')", self.inner.variant())
    }
}

/// A resolved experiment: variant, model, run mode, seed and worker count.
#[pyclass(name = "Experiment", module = "crossdock_py")]
struct PyExperiment {
    spec: ExperimentSpec,
}

#[pymethods]
impl PyExperiment {
    #[new]
    #[pyo3(signature = (variant = "base", mode = "fixed:500", seed = 12345, workers = 1, target = None, cap = None, length_min = None))]
    fn new(
        variant: &str,
        mode: &str,
        seed: u64,
        workers: usize,
        target: Option<f64>,
        cap: Option<u64>,
        length_min: Option<f64>,
    ) -> PyResult<Self> {
        let mut spec = ExperimentSpec::for_variant(parse_variant(variant)?);
        spec.root_seed = seed;
        spec.workers = workers;
        if let Some(len) = length_min {
            spec.model.replication_length_min = len;
        }
        spec.mode = match mode.parse::<ModeKind>().map_err(config_err)? {
            ModeKind::Fixed(n) => RunMode::Fixed(n),
            ModeKind::Sequential => {
                let mut seq = SequentialConfig::default();
                if let Some(t) = target {
                    seq.target_half_width = t;
                }
                if let Some(c) = cap {
                    seq.replication_cap = c;
                }
                RunMode::Sequential(seq)
            }
        };
        spec.validate().map_err(config_err)?;
        Ok(Self { spec })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self { spec: ExperimentSpec::from_toml(text).map_err(config_err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { spec: ExperimentSpec::load(&path).map_err(core_err)? })
    }

    fn to_toml(&self) -> String {
        self.spec.to_toml()
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.spec.variant.as_str()
    }

    #[getter]
    fn mode(&self) -> String {
        self.spec.mode.label()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.spec.root_seed
    }

    #[getter]
    fn workers(&self) -> usize {
        self.spec.workers
    }

    #[setter]
    fn set_workers(&mut self, workers: usize) -> PyResult<()> {
        if workers == 0 {
            return Err(PyValueError::new_err("workers must be >= 1"));
        }
        self.spec.workers = workers;
        Ok(())
    }

    /// Runs in memory. Returns the run report with `costs` and `rows` added.
    fn run<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let (archive, report) = py.detach(|| experiment::run_in_memory(&self.spec)).map_err(core_err)?;
        let d = report_dict(py, &report)?;
        d.set_item("costs", archive.costs())?;
        let rows = PyList::empty(py);
        for r in &archive.rows {
            rows.append(result_dict(py, r)?)?;
        }
        d.set_item("rows", rows)?;
        Ok(d)
    }

    /// Runs and streams rows to a CSV archive at `path`.
    fn run_to_file<'py>(&self, py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
        let report = py.detach(|| experiment::run_to_file(&self.spec, &path)).map_err(core_err)?;
        report_dict(py, &report)
    }

    /// Runs the four trace checks on the reduced scenario. Returns
    /// `(passed, report_text)`.
    fn validate(&self, py: Python<'_>) -> PyResult<(bool, String)> {
        let report = py
            .detach(|| experiment::validate(self.spec.variant, &self.spec.model, self.spec.root_seed))
            .map_err(core_err)?;
        Ok((report.passed(), report.render()))
    }

    fn __repr__(&self) -> String {
        format!("Experiment({})", self.spec)
    }
}

/// Reads a run archive, verifying its footer.
#[pyfunction]
fn load_archive<'py>(py: Python<'py>, path: PathBuf) -> PyResult<Bound<'py, PyDict>> {
    let a = RunArchive::load(&path).map_err(archive_err)?;
    let d = PyDict::new(py);
    d.set_item("version", &a.version)?;
    d.set_item("variant", a.spec.variant.as_str())?;
    d.set_item("root_seed", a.spec.root_seed)?;
    d.set_item("spec_toml", a.spec.to_toml())?;
    d.set_item("costs", a.costs())?;
    d.set_item("stop_reason", a.footer.stop_reason.as_str())?;
    d.set_item("summary", a.footer.summary.as_ref().map(|s| summary_dict(py, s)).transpose()?)?;
    let rows = PyList::empty(py);
    for r in &a.rows {
        rows.append(result_dict(py, r)?)?;
    }
    d.set_item("rows", rows)?;
    Ok(d)
}

/// Compares Total Usage Cost between two archives.
#[pyfunction]
#[pyo3(signature = (a, b, alpha = 0.05, kind = "means"))]
fn compare_archives<'py>(py: Python<'py>, a: PathBuf, b: PathBuf, alpha: f64, kind: &str) -> PyResult<Bound<'py, PyDict>> {
    let kind = parse_kind(kind)?;
    let a = RunArchive::load(&a).map_err(archive_err)?;
    let b = RunArchive::load(&b).map_err(archive_err)?;
    let r = experiment::compare_archives(&a, &b, alpha, kind).map_err(stats_err)?;
    comparison_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (a, b, alpha = 0.05, identifier = "Total Usage Cost"))]
fn paired_t_compare<'py>(
    py: Python<'py>,
    a: Vec<f64>,
    b: Vec<f64>,
    alpha: f64,
    identifier: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let r = stats::paired_t_compare(identifier, &a, &b, alpha).map_err(stats_err)?;
    comparison_dict(py, &r)
}

#[pyfunction]
#[pyo3(signature = (a, b, alpha = 0.05, identifier = "Total Usage Cost"))]
fn variance_ratio_compare<'py>(
    py: Python<'py>,
    a: Vec<f64>,
    b: Vec<f64>,
    alpha: f64,
    identifier: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let r = stats::variance_ratio_compare(identifier, &a, &b, alpha).map_err(stats_err)?;
    comparison_dict(py, &r)
}

/// t-based half-width; `None` for fewer than two observations.
#[pyfunction]
#[pyo3(signature = (sample, confidence = DEFAULT_CONFIDENCE))]
fn half_width(sample: Vec<f64>, confidence: f64) -> Option<f64> {
    stats::half_width(&sample, confidence)
}

#[pyfunction]
#[pyo3(signature = (sample, confidence = DEFAULT_CONFIDENCE))]
fn summarize<'py>(py: Python<'py>, sample: Vec<f64>, confidence: f64) -> PyResult<Bound<'py, PyDict>> {
    let s = stats::summarize_with(&sample, confidence).map_err(stats_err)?;
    summary_dict(py, &s)
}

#[pyfunction]
fn t_quantile(p: f64, df: f64) -> f64 {
    dist::t_quantile(p, df)
}

#[pyfunction]
fn f_quantile(p: f64, d1: f64, d2: f64) -> f64 {
    dist::f_quantile(p, d1, d2)
}

/// Replications needed for half-width `target` given a standard deviation.
#[pyfunction]
#[pyo3(signature = (sd, target, confidence = DEFAULT_CONFIDENCE))]
fn expected_replications(sd: f64, target: f64, confidence: f64) -> u64 {
    stats::expected_replications(sd, target, confidence)
}

/// The sequential stopping rule driven from Python, one observation at a time.
#[pyclass(name = "SequentialController", module = "crossdock_py")]
struct PySequential {
    config: SequentialConfig,
    state: SequentialState,
}

#[pymethods]
impl PySequential {
    #[new]
    #[pyo3(signature = (target, confidence = DEFAULT_CONFIDENCE, cap = 999_999, min_replications = 3))]
    fn new(target: f64, confidence: f64, cap: u64, min_replications: u64) -> PyResult<Self> {
        let config = SequentialConfig {
            target_half_width: target,
            confidence,
            replication_cap: cap,
            min_replications,
        };
        config.validate().map_err(config_err)?;
        Ok(Self { config, state: SequentialState::new() })
    }

    fn push(&mut self, x: f64) {
        self.state.push(x);
    }

    fn should_continue(&self) -> bool {
        stats::should_continue(&self.state, &self.config)
    }

    #[getter]
    fn completed(&self) -> u64 {
        self.state.completed()
    }

    #[getter]
    fn mean(&self) -> Option<f64> {
        self.state.mean()
    }

    #[getter]
    fn half_width(&self) -> Option<f64> {
        self.state.half_width(self.config.confidence)
    }

    /// `None` while the rule says continue.
    #[getter]
    fn stop_reason(&self) -> Option<&'static str> {
        self.state.stop_reason(&self.config).map(|r| r.as_str())
    }
}

#[pymodule]
fn crossdock_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("MEASURE", experiment::MEASURE_IDENTIFIER)?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyExperiment>()?;
    m.add_class::<PySequential>()?;
    m.add_function(wrap_pyfunction!(load_archive, m)?)?;
    m.add_function(wrap_pyfunction!(compare_archives, m)?)?;
    m.add_function(wrap_pyfunction!(paired_t_compare, m)?)?;
    m.add_function(wrap_pyfunction!(variance_ratio_compare, m)?)?;
    m.add_function(wrap_pyfunction!(half_width, m)?)?;
    m.add_function(wrap_pyfunction!(summarize, m)?)?;
    m.add_function(wrap_pyfunction!(t_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(f_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(expected_replications, m)?)?;
    Ok(())
}
