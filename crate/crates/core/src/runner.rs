//! Runs an [`ExperimentConfig`] and collects its CSV outputs.
//!
//! Every experiment produces a set of named CSV documents held in memory;
//! they are written to disk in a fixed order by a single thread. A fit that
//! does not converge is recorded and reported after the data are written.

use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::{estimate_bath, fft_sigma, fit_curve, fit_decay, fit_powerlaw, metrics, FitModel, FitResult};
use crate::bath::BathModel;
use crate::bloch::{averaged_chevron, BlochVector};
use crate::centralspin::{hh_scan, write_transfer_csv};
use crate::config::{apply_sweep, CoolingKind, Experiment, ExperimentConfig};
use crate::cooling::{rabi_cool_cycle, run_protocol, CoolingResult, Protocol, RabiCoolingConfig};
use crate::error::{Error, Result};
use crate::model::default_gaas_registry;
use crate::sequences::{
    run_chevron, run_cpmg, run_detuned_ramsey, run_phase_sweep, run_rabi, run_ramsey, run_t1_pumpprobe, Envelope,
    RabiDrive,
};
use crate::units::{sigma_from_t2_star, t2_star_from_sigma, MHZ_NS, TWO_PI};

/// Anything serializable as a header-first CSV document.
pub trait CsvRecord {
    fn write_csv_to(&self, w: &mut dyn Write) -> std::io::Result<()>;
}

impl CsvRecord for Envelope {
    fn write_csv_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        self.write_csv(w)
    }
}

impl CsvRecord for CoolingResult {
    fn write_csv_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        self.write_csv(w)
    }
}

impl CsvRecord for FitResult {
    fn write_csv_to(&self, w: &mut dyn Write) -> std::io::Result<()> {
        self.write_csv(w)
    }
}

/// Writes `data` to `path` as CSV.
pub fn emit_results(data: &dyn CsvRecord, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = std::io::BufWriter::new(file);
    data.write_csv_to(&mut w).map_err(io)?;
    w.flush().map_err(io)
}

fn csv_string(data: &dyn CsvRecord) -> String {
    let mut buf = Vec::new();
    data.write_csv_to(&mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv is ascii")
}

/// In-memory results of one run.
#[derive(Debug, Default)]
pub struct RunOutput {
    /// (file name, contents) in write order.
    pub files: Vec<(String, String)>,
    /// Scalar results, written as `summary.csv`.
    pub summary: Vec<(String, f64)>,
    /// First fit that failed to converge.
    pub fit_error: Option<Error>,
}

impl RunOutput {
    fn file(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn csv(&mut self, name: &str, data: &dyn CsvRecord) {
        self.file(name, csv_string(data));
    }

    fn value(&mut self, name: impl Display, v: f64) {
        self.summary.push((name.to_string(), v));
    }

    /// Keeps a converged fit; remembers the first non-convergence.
    fn fit(&mut self, result: Result<FitResult>) -> Result<Option<FitResult>> {
        match result {
            Ok(f) => Ok(Some(f)),
            Err(e @ Error::FitFailed { .. }) => {
                if self.fit_error.is_none() {
                    self.fit_error = Some(e);
                }
                Ok(None)
            }
            Err(e) => Err(e),
        }
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.iter().find(|(n, _)| n == name).map(|(_, c)| c.as_str())
    }

    pub fn summary_value(&self, name: &str) -> Option<f64> {
        self.summary.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("quantity,value\n");
        for (k, v) in &self.summary {
            s.push_str(&format!("{k},{v}\n"));
        }
        s
    }

    /// Writes all files plus `summary.csv` into `dir`, then reports a fit
    /// failure if one occurred.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut written = Vec::new();
        let summary = ("summary.csv".to_string(), self.summary_csv());
        for (name, contents) in self.files.iter().chain(std::iter::once(&summary)) {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Runs the configured experiment.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let mut out = RunOutput::default();
    match cfg.experiment {
        Experiment::Rabi => rabi(cfg, &mut out)?,
        Experiment::Ramsey => ramsey(cfg, &mut out)?,
        Experiment::DetunedRamsey => detuned_ramsey(cfg, &mut out)?,
        Experiment::Cpmg => cpmg(cfg, &mut out)?,
        Experiment::T1 => t1(cfg, &mut out)?,
        Experiment::PhaseSweep => {
            let env = run_phase_sweep(&cfg.qubit, &cfg.bath, &cfg.phase_sweep.phi.values(), &cfg.settings())?;
            out.csv("envelope.csv", &env);
        }
        Experiment::RabiCooling => cooling(cfg, CoolingKind::RabiCooling, &mut out)?,
        Experiment::Qsc => cooling(cfg, CoolingKind::Qsc, &mut out)?,
        Experiment::HhScan => {
            let points = hh_scan(&cfg.centralspin, &cfg.hh_scan.omega.values(), cfg.hh_scan.t_drive)?;
            let mut buf = Vec::new();
            write_transfer_csv(&points, &mut buf).expect("writing to a Vec cannot fail");
            out.file("transfer.csv", String::from_utf8(buf).expect("csv is ascii"));
            if let Some(peak) = points.iter().max_by(|a, b| a.delta_iz.abs().total_cmp(&b.delta_iz.abs())) {
                out.value("peak_omega", peak.omega);
                out.value("peak_delta_iz", peak.delta_iz);
            }
        }
        Experiment::Chevron => chevron(cfg, &mut out)?,
    }
    Ok(out)
}

/// Runs the configured experiment and writes its outputs into `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let out = run_experiment(cfg)?;
    let written = out.write_to(dir)?;
    match out.fit_error {
        Some(e) => Err(e),
        None => Ok(written),
    }
}

/// Parses a config file; see [`ExperimentConfig::from_toml_str`].
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    ExperimentConfig::from_toml_str(&text)
}

fn fit_summary(out: &mut RunOutput, fit: &FitResult) {
    for ((name, v), e) in fit.model.param_names().iter().zip(&fit.params).zip(&fit.errors) {
        out.value(name, *v);
        out.value(format!("{name}_err"), *e);
    }
}

fn rabi(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let s = &cfg.rabi;
    let drive = RabiDrive {
        omega: s.omega,
        detuning: s.detuning,
        ac_stark: s.ac_stark,
    };
    let env = run_rabi(&cfg.qubit, &cfg.bath, &drive, &s.t.values(), &cfg.settings())?;
    out.csv("envelope.csv", &env);
    if let Some(model) = s.fit {
        if let Some(fit) = out.fit(fit_curve(&env.sweep, &env.top, model))? {
            out.csv("fit.csv", &fit);
            fit_summary(out, &fit);
            let t2 = fit.time_constant();
            out.value("t2_rabi", t2);
            if let Some(f) = fit.param("f") {
                out.value("f_rabi", f * 1e3);
            }
            if s.omega > 0.0 {
                let m = metrics(t2, s.omega)?;
                out.value("q", m.q);
                out.value("f_pi", m.f_pi);
            }
        }
    }
    Ok(())
}

/// Ramsey probe with optional fit and spectral width.
fn probe(
    cfg: &ExperimentConfig,
    bath: &BathModel,
    tau: &[f64],
    serrodyne: f64,
    model: Option<FitModel>,
    fft: bool,
    out: &mut RunOutput,
) -> Result<()> {
    let env = run_ramsey(&cfg.qubit, bath, tau, serrodyne, &cfg.settings())?;
    out.csv("envelope.csv", &env);
    if let Some(model) = model {
        if let Some(fit) = out.fit(fit_decay(&env, model))? {
            out.csv("fit.csv", &fit);
            fit_summary(out, &fit);
            let t2 = fit.time_constant();
            out.value("t2_star", t2);
            out.value("sigma_from_fit", sigma_from_t2_star(t2));
        }
    }
    if fft {
        let sigma = fft_sigma(&env)?;
        out.value("sigma_fft", sigma);
        out.value("t2_star_fft", t2_star_from_sigma(sigma));
    }
    Ok(())
}

/// Runs a cooling protocol and returns the bath it leaves behind.
fn cool(cfg: &ExperimentConfig, protocol: &Protocol, out: &mut RunOutput) -> Result<BathModel> {
    let res = run_protocol(protocol, cfg.reps, &cfg.bath, &cfg.ensemble)?;
    out.csv("cooling_trace.csv", &res);
    out.value("final_sigma", res.final_sigma);
    out.value("final_t2_star", res.final_t2_star());
    out.value("final_mean", res.final_mean);
    out.value("mean_stderr", res.mean_stderr);
    out.value("experiment_time_us", res.experiment_time);
    out.value("cooling_factor", cfg.bath.sigma_warm / res.final_sigma);
    let est = estimate_bath(
        t2_star_from_sigma(cfg.bath.sigma_warm),
        &default_gaas_registry(),
        Some(res.final_sigma),
        cfg.estimator.convention,
    )?;
    out.value("n_nuclei", est.n_nuclei);
    out.value("a_c", est.a_c);
    out.value("macrostates", est.macrostates);
    Ok(BathModel {
        sigma_static: res.final_sigma,
        ..cfg.bath.clone()
    })
}

fn ramsey(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let s = &cfg.ramsey;
    let bath = match s.cooled_by {
        Some(kind) => cool(cfg, &cfg.protocol(kind), out)?,
        None => cfg.bath.clone(),
    };
    probe(cfg, &bath, &s.tau.values(), s.serrodyne, s.fit, s.fft, out)
}

fn cooling(cfg: &ExperimentConfig, kind: CoolingKind, out: &mut RunOutput) -> Result<()> {
    let protocol = cfg.protocol(kind);
    if let Some(sweep) = &cfg.sweep {
        let mut csv = format!("{},final_sigma,final_t2_star,final_mean\n", sweep.parameter);
        for &v in &sweep.values {
            let p = apply_sweep(&protocol, &sweep.parameter, v)?;
            let res = run_protocol(&p, cfg.reps, &cfg.bath, &cfg.ensemble)?;
            csv.push_str(&format!("{v},{},{},{}\n", res.final_sigma, res.final_t2_star(), res.final_mean));
        }
        out.file("sweep.csv", csv);
    }
    let bath = cool(cfg, &protocol, out)?;
    let p = &cfg.probe;
    if p.enabled {
        probe(cfg, &bath, &p.tau.values(), p.serrodyne, p.fit, p.fft, out)?;
    }
    Ok(())
}

fn detuned_ramsey(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let s = &cfg.detuned_ramsey;
    let bath = match s.cooled_by {
        Some(kind) => cool(cfg, &cfg.protocol(kind), out)?,
        None => cfg.bath.clone(),
    };
    let offsets = s.offsets.values();
    let envs = run_detuned_ramsey(&cfg.qubit, &bath, &offsets, &s.tau.values(), &cfg.settings())?;
    let mut csv = String::from("offset,tau,visibility\n");
    for (&offset, env) in offsets.iter().zip(&envs) {
        for (tau, c) in env.sweep.iter().zip(&env.visibility) {
            csv.push_str(&format!("{offset},{tau},{c}\n"));
        }
    }
    out.file("detuned_ramsey.csv", csv);
    if let Some(target) = s.fit_offset {
        let (j, _) = offsets
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
            .expect("offsets are non-empty");
        let env = &envs[j];
        out.csv("envelope.csv", env);
        out.value("fit_offset", offsets[j]);
        if let Some(fit) = out.fit(fit_decay(env, s.fit))? {
            out.csv("fit.csv", &fit);
            fit_summary(out, &fit);
            out.value("t2_star", fit.time_constant());
        }
    }
    Ok(())
}

fn cpmg(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let s = &cfg.cpmg;
    let settings = cfg.settings();
    let mut envelopes = String::from("n_pi,sweep,top,bottom,visibility,shots\n");
    let mut fits = format!("n_pi,{}", FitResult::CSV_HEADER);
    fits.push('\n');
    let mut points = Vec::new();
    for (i, &n) in s.n_pi.iter().enumerate() {
        let grid = crate::sequences::linspace(0.0, s.t_max_for(i), s.points);
        let env = run_cpmg(&cfg.qubit, &cfg.bath, n, &grid, s.convention, &settings)?;
        for line in env.to_csv_string().lines().skip(1) {
            envelopes.push_str(&format!("{n},{line}\n"));
        }
        if let Some(fit) = out.fit(fit_decay(&env, s.fit))? {
            for line in fit.to_csv_string().lines().skip(1) {
                fits.push_str(&format!("{n},{line}\n"));
            }
            let t2 = fit.time_constant();
            out.value(format!("t2_n{n}"), t2);
            if let Some(a) = fit.alpha() {
                out.value(format!("alpha_n{n}"), a);
            }
            points.push((n as f64, t2));
        }
    }
    out.file("cpmg.csv", envelopes);
    out.file("cpmg_fits.csv", fits);
    if points.len() >= 2 && out.fit_error.is_none() {
        let pl = fit_powerlaw(&points)?;
        out.value("gamma", pl.gamma);
        out.value("gamma_err", pl.gamma_err);
        out.value("prefactor", pl.prefactor);
    }
    Ok(())
}

fn t1(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let env = run_t1_pumpprobe(&cfg.qubit, &cfg.t1.tau.values(), &cfg.settings())?;
    out.csv("envelope.csv", &env);
    if let Some(model) = cfg.t1.fit {
        if let Some(fit) = out.fit(fit_decay(&env, model))? {
            out.csv("fit.csv", &fit);
            fit_summary(out, &fit);
            out.value("t1_us", fit.time_constant() * 1e-3);
        }
    }
    Ok(())
}

fn chevron(cfg: &ExperimentConfig, out: &mut RunOutput) -> Result<()> {
    let s = &cfg.chevron;
    let detunings = s.detuning.values();
    let t = s.t.values();
    let settings = cfg.settings();
    let lock = |detuning: f64, state: &mut crate::bath::BathState, rng: &mut crate::rng::SimRng| {
        if !s.lock {
            return;
        }
        let lc = RabiCoolingConfig {
            f_c_offset: -(detuning - s.ac_stark),
            ..cfg.rabi_cooling.clone()
        };
        for _ in 0..s.lock_cycles {
            *state = rabi_cool_cycle(*state, &lc, cfg.bath.sigma_warm, rng);
        }
    };
    let envs = run_chevron(&cfg.qubit, &cfg.bath, s.omega, s.ac_stark, &detunings, &t, &settings, lock)?;
    // Lineshape with initialization error and drive-induced depolarization.
    let init_z = 2.0 * settings.measurement.osp_fidelity - 1.0;
    let flip = TWO_PI * cfg.qubit.flip_rate(s.omega) * MHZ_NS;
    let mut csv = String::from("detuning,t,bright,model\n");
    let mut max_dev: f64 = 0.0;
    for (&d, env) in detunings.iter().zip(&envs) {
        for (&ti, &b) in t.iter().zip(&env.top) {
            let model = if s.model {
                let p = averaged_chevron(ti, d, s.omega, cfg.bath.sigma_static, s.ac_stark);
                let z = init_z * (1.0 - 2.0 * p) * (-flip * ti).exp();
                let bright = settings.measurement.bright_probability(&BlochVector::new(0.0, 0.0, z));
                max_dev = max_dev.max((bright - b).abs());
                format!("{bright}")
            } else {
                String::new()
            };
            csv.push_str(&format!("{d},{ti},{b},{model}\n"));
        }
    }
    out.file("chevron.csv", csv);
    if s.model {
        out.value("max_abs_model_deviation", max_dev);
    }
    Ok(())
}
