//! Python module `kms`: closed-form statistics, simulation and fitting.

use std::path::PathBuf;

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use kms_core::estimator::fit_trace;
use kms_core::model::{curve as model_curve, special_case_params, threshold_grid};
use kms_core::simulator::{generate, measure as sim_measure};
use kms_core::{DopplerParams, Error, SimConfig, SpecialCase, Statistic};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        e if e.is_numerical() => PyArithmeticError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

/// κ-μ shadowed channel parameters: kappa, mu, m, r_bar (rms amplitude), rho.
#[pyclass(frozen, module = "kms")]
#[derive(Clone)]
pub struct ChannelParams(kms_core::ChannelParams);

#[pymethods]
impl ChannelParams {
    #[new]
    #[pyo3(signature = (kappa, mu, m, r_bar = 1.0, rho = 0.0))]
    fn new(kappa: f64, mu: f64, m: f64, r_bar: f64, rho: f64) -> PyResult<Self> {
        kms_core::ChannelParams::new(kappa, mu, m, r_bar, rho).map(Self).map_err(to_py)
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu()
    }

    #[getter]
    fn m(&self) -> f64 {
        self.0.m()
    }

    #[getter]
    fn r_bar(&self) -> f64 {
        self.0.r_bar()
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho()
    }

    fn __repr__(&self) -> String {
        format!(
            "ChannelParams(kappa={}, mu={}, m={}, r_bar={}, rho={})",
            self.0.kappa(),
            self.0.mu(),
            self.0.m(),
            self.0.r_bar(),
            self.0.rho()
        )
    }
}

/// Uniformly sampled envelope.
#[pyclass(frozen, module = "kms")]
pub struct EnvelopeTrace(kms_core::EnvelopeTrace);

#[pymethods]
impl EnvelopeTrace {
    #[new]
    fn new(samples: Vec<f64>, sample_rate_hz: f64) -> PyResult<Self> {
        kms_core::EnvelopeTrace::from_samples(samples, sample_rate_hz).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        kms_core::EnvelopeTrace::load(&path).map(Self).map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.0.save(&path).map_err(to_py)
    }

    #[getter]
    fn samples(&self) -> Vec<f64> {
        self.0.samples().to_vec()
    }

    #[getter]
    fn sample_rate_hz(&self) -> f64 {
        self.0.sample_rate_hz()
    }

    #[getter]
    fn duration_s(&self) -> f64 {
        self.0.duration_s()
    }

    fn rms(&self) -> f64 {
        self.0.rms()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        format!("EnvelopeTrace(len={}, sample_rate_hz={})", self.0.len(), self.0.sample_rate_hz())
    }
}

fn statistic(name: &str) -> PyResult<Statistic> {
    name.parse().map_err(to_py)
}

/// Evaluates "pdf", "cdf", "lcr" or "afd" at amplitude r. LCR and AFD are normalized by f_m.
#[pyfunction]
fn evaluate(stat: &str, p: &ChannelParams, r: f64) -> PyResult<f64> {
    statistic(stat)?.evaluate(&p.0, r).map_err(to_py)
}

#[pyfunction]
fn pdf(p: &ChannelParams, r: f64) -> PyResult<f64> {
    Statistic::Pdf.evaluate(&p.0, r).map_err(to_py)
}

#[pyfunction]
fn cdf(p: &ChannelParams, r: f64) -> PyResult<f64> {
    Statistic::Cdf.evaluate(&p.0, r).map_err(to_py)
}

#[pyfunction]
fn lcr(p: &ChannelParams, r: f64) -> PyResult<f64> {
    Statistic::Lcr.evaluate(&p.0, r).map_err(to_py)
}

#[pyfunction]
fn afd(p: &ChannelParams, r: f64) -> PyResult<f64> {
    Statistic::Afd.evaluate(&p.0, r).map_err(to_py)
}

/// Returns (thresholds_db, values); failed points are NaN.
#[pyfunction]
#[pyo3(signature = (stat, p, db_from = -30.0, db_to = 6.0, points = 37))]
fn curve(stat: &str, p: &ChannelParams, db_from: f64, db_to: f64, points: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let grid = threshold_grid(db_from, db_to, points).map_err(to_py)?;
    let c = model_curve(&p.0, statistic(stat)?, &grid).map_err(to_py)?;
    Ok((c.thresholds_db, c.values))
}

/// Parameters of "rayleigh", "rice" (param k), "nakagami" (param m) or "kappa_mu" (params kappa, mu).
#[pyfunction]
#[pyo3(signature = (name, *params))]
fn special_case(name: &str, params: Vec<f64>) -> PyResult<ChannelParams> {
    let arity = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("{name} takes {n} parameter(s), got {}", params.len())))
        }
    };
    let kind = match name.to_ascii_lowercase().as_str() {
        "rayleigh" => arity(0).map(|_| SpecialCase::Rayleigh)?,
        "rice" => arity(1).map(|_| SpecialCase::Rice { k: params[0] })?,
        "nakagami" => arity(1).map(|_| SpecialCase::Nakagami { m: params[0] })?,
        "kappa_mu" => arity(2).map(|_| SpecialCase::KappaMu { kappa: params[0], mu: params[1] })?,
        other => return Err(PyValueError::new_err(format!("unknown special case '{other}'"))),
    };
    special_case_params(kind).map(ChannelParams).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (p, fm, fs, duration, seed = 0, shadow_fm = None))]
fn simulate(p: &ChannelParams, fm: f64, fs: f64, duration: f64, seed: u64, shadow_fm: Option<f64>) -> PyResult<EnvelopeTrace> {
    let d = DopplerParams::new(fm).map_err(to_py)?;
    let mut cfg = SimConfig::new(p.0, d, fs, duration, seed).map_err(to_py)?;
    if let Some(hz) = shadow_fm {
        cfg = cfg.with_shadow_doppler(hz).map_err(to_py)?;
    }
    generate(&cfg).map(EnvelopeTrace).map_err(to_py)
}

/// Empirical normalized LCR and AFD of a trace over a dB grid relative to its rms.
#[pyfunction]
#[pyo3(signature = (trace, fm, db_from = -30.0, db_to = 6.0, points = 37))]
fn measure<'py>(
    py: Python<'py>,
    trace: &EnvelopeTrace,
    fm: f64,
    db_from: f64,
    db_to: f64,
    points: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = threshold_grid(db_from, db_to, points).map_err(to_py)?;
    let e = sim_measure(&trace.0, &DopplerParams::new(fm).map_err(to_py)?, &grid).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("thresholds_db", e.thresholds_db)?;
    d.set_item("levels", e.levels)?;
    d.set_item("upcrossings", e.upcrossings)?;
    d.set_item("time_below_s", e.time_below_s)?;
    d.set_item("n_fades", e.n_fades)?;
    d.set_item("lcr_normalized", e.lcr_normalized)?;
    d.set_item("afd_normalized", e.afd_normalized)?;
    d.set_item("duration_s", e.duration_s)?;
    d.set_item("rms", e.rms)?;
    Ok(d)
}

/// Two-stage fit; returns the report as a dict. f_m_hat and rho_hat are None when the LCR stage failed.
#[pyfunction]
fn fit<'py>(py: Python<'py>, trace: &EnvelopeTrace) -> PyResult<Bound<'py, PyDict>> {
    let r = fit_trace(&trace.0).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("kappa_hat", r.kappa_hat)?;
    d.set_item("mu_hat", r.mu_hat)?;
    d.set_item("r_bar_hat", r.r_bar_hat)?;
    d.set_item("m_hat", r.m_hat)?;
    d.set_item("f_m_hat", r.f_m_hat)?;
    d.set_item("rho_hat", r.rho_hat)?;
    d.set_item("pdf_residual", r.pdf_residual)?;
    d.set_item("lcr_residual", r.lcr_residual)?;
    d.set_item("n_bins", r.n_bins)?;
    d.set_item("lcr_thresholds", r.lcr_thresholds)?;
    d.set_item("pdf_converged", r.pdf_converged)?;
    d.set_item("lcr_converged", r.lcr_converged)?;
    d.set_item("rms", r.rms)?;
    d.set_item("n_samples", r.n_samples)?;
    d.set_item("lcr_error", r.lcr_error.clone())?;
    d.set_item("complete", r.is_complete())?;
    Ok(d)
}

#[pymodule(name = "kms")]
fn kms_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ChannelParams>()?;
    m.add_class::<EnvelopeTrace>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(pdf, m)?)?;
    m.add_function(wrap_pyfunction!(cdf, m)?)?;
    m.add_function(wrap_pyfunction!(lcr, m)?)?;
    m.add_function(wrap_pyfunction!(afd, m)?)?;
    m.add_function(wrap_pyfunction!(curve, m)?)?;
    m.add_function(wrap_pyfunction!(special_case, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    Ok(())
}
