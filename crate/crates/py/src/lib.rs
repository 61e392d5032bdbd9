//! Python bindings for the simulator core.

use std::collections::BTreeMap;

use overhauser_core as core;
use overhauser_core::analysis::{AbundanceConvention, FitModel};
use overhauser_core::cooling::{EnsembleSettings, Protocol, QscConfig, RabiCoolingConfig};
use overhauser_core::sequences::{CpmgConvention, RabiDrive, RunSettings};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    match e {
        core::Error::FitFailed { .. } => PyRuntimeError::new_err(e.to_string()),
        core::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_model(name: &str) -> PyResult<FitModel> {
    name.parse::<FitModel>().map_err(err)
}

/// Electron-spin qubit parameters.
#[pyclass(name = "Qubit", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyQubit {
    f_zeeman: f64,
    g_factor: f64,
    t1: f64,
    osp_time: f64,
    osp_fidelity: f64,
    kappa_ratio: f64,
    temperature: f64,
}

impl From<&PyQubit> for core::model::QubitParams {
    fn from(q: &PyQubit) -> Self {
        Self {
            f_zeeman: q.f_zeeman,
            g_factor: q.g_factor,
            t1: q.t1,
            osp_time: q.osp_time,
            osp_fidelity: q.osp_fidelity,
            kappa_ratio: q.kappa_ratio,
            temperature: q.temperature,
        }
    }
}

#[pymethods]
impl PyQubit {
    #[new]
    fn new() -> Self {
        let q = core::model::QubitParams::default();
        Self {
            f_zeeman: q.f_zeeman,
            g_factor: q.g_factor,
            t1: q.t1,
            osp_time: q.osp_time,
            osp_fidelity: q.osp_fidelity,
            kappa_ratio: q.kappa_ratio,
            temperature: q.temperature,
        }
    }

    fn __repr__(&self) -> String {
        format!("{:?}", core::model::QubitParams::from(self))
    }
}

/// Overhauser-field bath: quasi-static width plus an OU component.
#[pyclass(name = "Bath", get_all, set_all, from_py_object)]
#[derive(Clone)]
struct PyBath {
    sigma_static: f64,
    sigma_dyn: f64,
    tau_corr: f64,
    relax_time: f64,
    sigma_warm: f64,
    a_c: f64,
}

impl From<&PyBath> for core::bath::BathModel {
    fn from(b: &PyBath) -> Self {
        Self {
            sigma_static: b.sigma_static,
            sigma_dyn: b.sigma_dyn,
            tau_corr: b.tau_corr,
            relax_time: b.relax_time,
            sigma_warm: b.sigma_warm,
            a_c: b.a_c,
        }
    }
}

#[pymethods]
impl PyBath {
    #[new]
    #[pyo3(signature = (sigma_static=None))]
    fn new(sigma_static: Option<f64>) -> Self {
        let b = core::bath::BathModel::default();
        Self {
            sigma_static: sigma_static.unwrap_or(b.sigma_static),
            sigma_dyn: b.sigma_dyn,
            tau_corr: b.tau_corr,
            relax_time: b.relax_time,
            sigma_warm: b.sigma_warm,
            a_c: b.a_c,
        }
    }

    fn __repr__(&self) -> String {
        format!("{:?}", core::bath::BathModel::from(self))
    }
}

/// Top/bottom bright fractions and visibility against a swept parameter.
#[pyclass(name = "Envelope", frozen)]
struct PyEnvelope(core::sequences::Envelope);

#[pymethods]
impl PyEnvelope {
    #[getter]
    fn sweep(&self) -> Vec<f64> {
        self.0.sweep.clone()
    }
    #[getter]
    fn top(&self) -> Vec<f64> {
        self.0.top.clone()
    }
    #[getter]
    fn bottom(&self) -> Vec<f64> {
        self.0.bottom.clone()
    }
    #[getter]
    fn visibility(&self) -> Vec<f64> {
        self.0.visibility.clone()
    }
    #[getter]
    fn shots(&self) -> usize {
        self.0.shots
    }
    fn __len__(&self) -> usize {
        self.0.len()
    }
    fn to_csv(&self) -> String {
        self.0.to_csv_string()
    }
    /// Fits the visibility with `model` (exponential, gaussian, stretched,
    /// recovery, exp_cosine, gauss_cosine).
    fn fit(&self, model: &str) -> PyResult<PyFit> {
        core::analysis::fit_decay(&self.0, parse_model(model)?).map(PyFit).map_err(err)
    }
    /// σ_OH (MHz) from the spectral width of the visibility.
    fn fft_sigma(&self) -> PyResult<f64> {
        core::analysis::fft_sigma(&self.0).map_err(err)
    }
}

#[pyclass(name = "FitResult", frozen)]
struct PyFit(core::analysis::FitResult);

#[pymethods]
impl PyFit {
    #[getter]
    fn model(&self) -> &'static str {
        self.0.model.name()
    }
    #[getter]
    fn params(&self) -> BTreeMap<String, f64> {
        names_to(&self.0.model, &self.0.params)
    }
    #[getter]
    fn errors(&self) -> BTreeMap<String, f64> {
        names_to(&self.0.model, &self.0.errors)
    }
    #[getter]
    fn residual(&self) -> f64 {
        self.0.residual
    }
    #[getter]
    fn time_constant(&self) -> f64 {
        self.0.time_constant()
    }
    fn eval(&self, t: f64) -> f64 {
        self.0.eval(t)
    }
    fn to_csv(&self) -> String {
        self.0.to_csv_string()
    }
    fn __repr__(&self) -> String {
        format!("FitResult({}, {:?})", self.0.model.name(), self.params())
    }
}

fn names_to(model: &FitModel, values: &[f64]) -> BTreeMap<String, f64> {
    model.param_names().iter().map(|s| s.to_string()).zip(values.iter().copied()).collect()
}

#[pyclass(name = "CoolingResult", frozen)]
struct PyCooling(core::cooling::CoolingResult);

#[pymethods]
impl PyCooling {
    #[getter]
    fn final_sigma(&self) -> f64 {
        self.0.final_sigma
    }
    #[getter]
    fn final_t2_star(&self) -> f64 {
        self.0.final_t2_star()
    }
    #[getter]
    fn final_mean(&self) -> f64 {
        self.0.final_mean
    }
    #[getter]
    fn experiment_time(&self) -> f64 {
        self.0.experiment_time
    }
    /// Per-cycle ensemble width, MHz.
    #[getter]
    fn sigma_trace(&self) -> Vec<f64> {
        self.0.trace.iter().map(|r| r.sigma_now).collect()
    }
    fn to_csv(&self) -> String {
        self.0.to_csv_string()
    }
}

fn settings(shots: usize, seed: u64, qubit: &core::model::QubitParams) -> RunSettings {
    RunSettings {
        shots,
        seed,
        measurement: core::sequences::MeasurementModel::from_qubit(qubit),
        ..RunSettings::default()
    }
}

fn defaults(qubit: Option<PyQubit>, bath: Option<PyBath>) -> (core::model::QubitParams, core::bath::BathModel) {
    (
        qubit.as_ref().map(Into::into).unwrap_or_default(),
        bath.as_ref().map(Into::into).unwrap_or_default(),
    )
}

/// Rabi oscillations against drive time (ns).
#[pyfunction]
#[pyo3(signature = (t, omega=130.0, detuning=0.0, ac_stark=0.0, qubit=None, bath=None, shots=10000, seed=1))]
#[allow(clippy::too_many_arguments)]
fn run_rabi(
    py: Python<'_>,
    t: Vec<f64>,
    omega: f64,
    detuning: f64,
    ac_stark: f64,
    qubit: Option<PyQubit>,
    bath: Option<PyBath>,
    shots: usize,
    seed: u64,
) -> PyResult<PyEnvelope> {
    let (q, b) = defaults(qubit, bath);
    let drive = RabiDrive {
        omega,
        detuning,
        ac_stark,
    };
    py.detach(|| core::sequences::run_rabi(&q, &b, &drive, &t, &settings(shots, seed, &q)))
        .map(PyEnvelope)
        .map_err(err)
}

/// Ramsey interferometry against free-evolution time (ns).
#[pyfunction]
#[pyo3(signature = (tau, serrodyne=0.0, qubit=None, bath=None, shots=10000, seed=1))]
fn run_ramsey(
    py: Python<'_>,
    tau: Vec<f64>,
    serrodyne: f64,
    qubit: Option<PyQubit>,
    bath: Option<PyBath>,
    shots: usize,
    seed: u64,
) -> PyResult<PyEnvelope> {
    let (q, b) = defaults(qubit, bath);
    py.detach(|| core::sequences::run_ramsey(&q, &b, &tau, serrodyne, &settings(shots, seed, &q)))
        .map(PyEnvelope)
        .map_err(err)
}

/// CPMG decay against total free-evolution time (ns).
#[pyfunction]
#[pyo3(signature = (n_pi, t, qubit=None, bath=None, shots=4000, seed=1))]
fn run_cpmg(
    py: Python<'_>,
    n_pi: usize,
    t: Vec<f64>,
    qubit: Option<PyQubit>,
    bath: Option<PyBath>,
    shots: usize,
    seed: u64,
) -> PyResult<PyEnvelope> {
    let (q, b) = defaults(qubit, bath);
    py.detach(|| {
        core::sequences::run_cpmg(&q, &b, n_pi, &t, CpmgConvention::NTau, &settings(shots, seed, &q))
    })
    .map(PyEnvelope)
    .map_err(err)
}

/// Pump-probe relaxation against delay (ns).
#[pyfunction]
#[pyo3(signature = (tau, qubit=None, shots=10000, seed=1))]
fn run_t1_pumpprobe(
    py: Python<'_>,
    tau: Vec<f64>,
    qubit: Option<PyQubit>,
    shots: usize,
    seed: u64,
) -> PyResult<PyEnvelope> {
    let q: core::model::QubitParams = qubit.as_ref().map(Into::into).unwrap_or_default();
    py.detach(|| core::sequences::run_t1_pumpprobe(&q, &tau, &settings(shots, seed, &q)))
        .map(PyEnvelope)
        .map_err(err)
}

/// Runs a cooling protocol ("qsc" or "rabi") from the warm bath.
#[pyfunction]
#[pyo3(signature = (protocol="qsc", bath=None, rounds=100, trajectories=2000, reps=1, seed=1))]
fn run_protocol(
    py: Python<'_>,
    protocol: &str,
    bath: Option<PyBath>,
    rounds: usize,
    trajectories: usize,
    reps: usize,
    seed: u64,
) -> PyResult<PyCooling> {
    let p = match protocol {
        "qsc" => Protocol::Qsc(QscConfig::default()),
        "rabi" | "rabi_cooling" => Protocol::Rabi(RabiCoolingConfig::default()),
        other => return Err(PyValueError::new_err(format!("unknown protocol `{other}`; use qsc or rabi"))),
    };
    let b: core::bath::BathModel = bath.as_ref().map(Into::into).unwrap_or_default();
    let ens = EnsembleSettings {
        rounds,
        trajectories,
        average_rounds: rounds.div_ceil(2),
        initial_sigma: None,
        seed,
    };
    py.detach(|| core::cooling::run_protocol(&p, reps, &b, &ens)).map(PyCooling).map_err(err)
}

/// Gaussian-averaged Rabi lineshape.
#[pyfunction]
fn averaged_chevron(t: f64, delta: f64, omega: f64, sigma_oh: f64, delta_ac: f64) -> f64 {
    core::bloch::averaged_chevron(t, delta, omega, sigma_oh, delta_ac)
}

/// Coherent Rabi lineshape at a fixed detuning.
#[pyfunction]
fn rabi_lineshape(t: f64, delta: f64, omega: f64) -> f64 {
    core::bloch::rabi_lineshape(t, delta, omega)
}

/// Fits `model` to arbitrary (x, y) data.
#[pyfunction]
fn fit_curve(x: Vec<f64>, y: Vec<f64>, model: &str) -> PyResult<PyFit> {
    core::analysis::fit_curve(&x, &y, parse_model(model)?).map(PyFit).map_err(err)
}

/// (N, A_c, macrostates) from T2* (ns).
#[pyfunction]
#[pyo3(signature = (t2_star, sigma_oh=None, convention="per_sublattice"))]
fn estimate_bath(t2_star: f64, sigma_oh: Option<f64>, convention: &str) -> PyResult<(f64, f64, f64)> {
    let conv = match convention {
        "per_sublattice" => AbundanceConvention::PerSublattice,
        "site_fraction" => AbundanceConvention::SiteFraction,
        other => return Err(PyValueError::new_err(format!("unknown convention `{other}`"))),
    };
    let reg = core::model::default_gaas_registry();
    let e = core::analysis::estimate_bath(t2_star, &reg, sigma_oh, conv).map_err(err)?;
    Ok((e.n_nuclei, e.a_c, e.macrostates))
}

/// (Q, f_π) of a Rabi oscillation.
#[pyfunction]
fn metrics(t2_rabi: f64, f_rabi: f64) -> PyResult<(f64, f64)> {
    let m = core::analysis::metrics(t2_rabi, f_rabi).map_err(err)?;
    Ok((m.q, m.f_pi))
}

/// γ, its error and the prefactor of T2 ∝ N^γ.
#[pyfunction]
fn fit_powerlaw(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let p = core::analysis::fit_powerlaw(&points).map_err(err)?;
    Ok((p.gamma, p.gamma_err, p.prefactor))
}

/// Nuclear polarization transfer against drive Rabi frequency.
#[pyfunction]
#[pyo3(signature = (omega, t_drive, omega_n, a_col, a_nc, detuning=2.0))]
fn hh_scan(
    py: Python<'_>,
    omega: Vec<f64>,
    t_drive: f64,
    omega_n: Vec<f64>,
    a_col: Vec<f64>,
    a_nc: Vec<f64>,
    detuning: f64,
) -> PyResult<Vec<(f64, f64)>> {
    let sys = core::centralspin::CentralSpinSystem {
        omega_n,
        a_col,
        a_nc,
        rabi: 0.0,
        detuning,
    };
    let pts = py.detach(|| core::centralspin::hh_scan(&sys, &omega, t_drive)).map_err(err)?;
    Ok(pts.into_iter().map(|p| (p.omega, p.delta_iz)).collect())
}

/// Runs a TOML config (or a preset name) and returns (files, summary).
/// A fit that fails to converge raises RuntimeError unless
/// `allow_fit_failure` is set, in which case the partial outputs are returned.
#[pyfunction]
#[pyo3(signature = (config, allow_fit_failure=false))]
fn run_config(
    py: Python<'_>,
    config: &str,
    allow_fit_failure: bool,
) -> PyResult<(BTreeMap<String, String>, BTreeMap<String, f64>)> {
    let cfg = match core::presets::source(config) {
        Some(_) => core::presets::load(config),
        None => core::config::ExperimentConfig::from_toml_str(config),
    }
    .map_err(err)?;
    let out = py.detach(|| core::runner::run_experiment(&cfg)).map_err(err)?;
    if let (Some(e), false) = (&out.fit_error, allow_fit_failure) {
        return Err(PyRuntimeError::new_err(e.to_string()));
    }
    let mut files: BTreeMap<String, String> = out.files.iter().cloned().collect();
    files.insert("summary.csv".into(), out.summary_csv());
    Ok((files, out.summary.iter().cloned().collect()))
}

/// Names of the bundled presets.
#[pyfunction]
fn presets() -> Vec<&'static str> {
    core::presets::names().collect()
}

#[pymodule]
fn overhauser(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyQubit>()?;
    m.add_class::<PyBath>()?;
    m.add_class::<PyEnvelope>()?;
    m.add_class::<PyFit>()?;
    m.add_class::<PyCooling>()?;
    m.add_function(wrap_pyfunction!(run_rabi, m)?)?;
    m.add_function(wrap_pyfunction!(run_ramsey, m)?)?;
    m.add_function(wrap_pyfunction!(run_cpmg, m)?)?;
    m.add_function(wrap_pyfunction!(run_t1_pumpprobe, m)?)?;
    m.add_function(wrap_pyfunction!(run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(averaged_chevron, m)?)?;
    m.add_function(wrap_pyfunction!(rabi_lineshape, m)?)?;
    m.add_function(wrap_pyfunction!(fit_curve, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_bath, m)?)?;
    m.add_function(wrap_pyfunction!(metrics, m)?)?;
    m.add_function(wrap_pyfunction!(fit_powerlaw, m)?)?;
    m.add_function(wrap_pyfunction!(hh_scan, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    Ok(())
}
