//! Feedback cooling of the Overhauser field.
//!
//! Both protocols act on an ensemble of bath trajectories. Each cycle applies
//! a drift that pulls the detuning toward a lock point plus diffusion that,
//! on its own, relaxes the ensemble back to the warm distribution. The
//! protocols are interleaved with the measurement they prepare, so the
//! quantity of interest is the steady state reached after many rounds.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{BathModel, BathState};
use crate::constants as c;
use crate::error::{Error, Result};
use crate::rng::{substream, tag, SimRng};
use crate::units::{MHZ_NS, TWO_PI};

/// Trajectories per parallel work unit; fixed so reductions do not depend
/// on the thread count.
const CHUNK: usize = 64;

/// Hartmann–Hahn efficiency: Gaussian in Ω_c around the feedback resonance.
pub fn resonance_efficiency(omega_c: f64, resonance: f64, width: f64) -> f64 {
    if width == 0.0 {
        return if omega_c == resonance { 1.0 } else { 0.0 };
    }
    (-(omega_c - resonance).powi(2) / (2.0 * width * width)).exp()
}

/// Response of the electron–nuclear drive step to its duration; maximal at
/// `t_opt` ns.
pub fn drive_response(t_c: f64, t_opt: f64) -> f64 {
    (std::f64::consts::PI * t_c / (2.0 * t_opt)).sin().powi(2)
}

/// Mean-reverting diffusion: adds variance `diffusion` and pulls toward
/// zero just enough to keep N(0, σ_warm²) stationary.
fn diffuse(delta: f64, diffusion: f64, sigma_warm: f64, rng: &mut SimRng) -> f64 {
    if diffusion == 0.0 {
        return delta;
    }
    let warm2 = sigma_warm * sigma_warm;
    let rho = if warm2 > diffusion { (1.0 - diffusion / warm2).sqrt() } else { 0.0 };
    let z: f64 = rng.sample(StandardNormal);
    delta * rho + diffusion.sqrt() * z
}

fn check_nonneg(fields: &[(&str, f64)]) -> Result<()> {
    for &(name, v) in fields {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::invalid(name, "must be finite and >= 0"));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiCoolingConfig {
    /// Cooling-drive Rabi frequency, MHz.
    pub omega_c: f64,
    /// Cooling-pulse length, ns.
    pub t_c: f64,
    /// Lock point relative to the probe frame, MHz.
    pub f_c_offset: f64,
    /// Half width of the locking window, MHz.
    pub capture_width: f64,
    /// Fractional pull per µs of drive at the lock point.
    pub gain: f64,
    /// Variance added per cycle, MHz².
    pub diffusion: f64,
    /// Ω_c of maximal efficiency, MHz.
    pub resonance: f64,
    pub resonance_width: f64,
}

impl Default for RabiCoolingConfig {
    fn default() -> Self {
        Self {
            omega_c: 17.0,
            t_c: 1000.0,
            f_c_offset: 0.0,
            capture_width: 100.0,
            gain: 0.5,
            diffusion: RABI_DIFFUSION,
            resonance: c::DIFFERENCE_FREQUENCY_MHZ,
            resonance_width: 3.0,
        }
    }
}

/// Calibrated so the steady state at default settings is σ = 2.90 MHz.
pub const RABI_DIFFUSION: f64 = 6.29;

impl RabiCoolingConfig {
    pub fn validate(&self) -> Result<()> {
        check_nonneg(&[
            ("rabi_cooling.omega_c", self.omega_c),
            ("rabi_cooling.t_c", self.t_c),
            ("rabi_cooling.capture_width", self.capture_width),
            ("rabi_cooling.gain", self.gain),
            ("rabi_cooling.diffusion", self.diffusion),
            ("rabi_cooling.resonance_width", self.resonance_width),
        ])?;
        if !self.f_c_offset.is_finite() {
            return Err(Error::invalid("rabi_cooling.f_c_offset", "must be finite"));
        }
        Ok(())
    }

    /// Deterministic part of one cycle.
    pub fn drift(&self, delta: f64) -> f64 {
        let d = delta - self.f_c_offset;
        let window = if self.capture_width > 0.0 {
            (-d * d / (2.0 * self.capture_width * self.capture_width)).exp()
        } else {
            0.0
        };
        let eff = resonance_efficiency(self.omega_c, self.resonance, self.resonance_width);
        // the pull saturates at a full correction per cycle
        let k = (self.gain * eff * self.t_c * 1e-3).min(1.0);
        -k * d * window
    }
}

/// One Rabi-cooling pulse.
pub fn rabi_cool_cycle(state: BathState, cfg: &RabiCoolingConfig, sigma_warm: f64, rng: &mut SimRng) -> BathState {
    let delta = diffuse(state.delta + cfg.drift(state.delta), cfg.diffusion, sigma_warm, rng);
    BathState { delta, ..state }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QscConfig {
    pub n_cycles: usize,
    /// First and last sensing times of the linear schedule, ns.
    pub tau_min: f64,
    pub tau_max: f64,
    /// Electron–nuclear drive time, ns.
    pub t_c: f64,
    /// Drive time of maximal response, ns.
    pub t_c_optimum: f64,
    /// Drive Rabi frequency, MHz.
    pub omega_c: f64,
    /// Maximum nuclear flips per cycle, in units of A_c.
    pub gain: f64,
    /// Drive-step pull toward the frame centre, per µs of drive.
    pub lock_gain: f64,
    /// Half width of the drive-step capture window, MHz.
    pub capture_width: f64,
    /// Variance added per cycle, MHz².
    pub diffusion: f64,
    /// Spin-pumping reset, ns.
    pub reset_duration: f64,
    /// Combined length of the two sensing π/2 pulses, ns.
    pub pulse_duration: f64,
    /// Single-shot contrast (2F − 1)² of the sensing measurement.
    pub contrast: f64,
    /// Electron T1 during sensing, µs.
    pub t1: f64,
    pub resonance: f64,
    pub resonance_width: f64,
}

/// Calibrated so the steady state at default settings is σ = 0.355 MHz
/// (bisection with [`calibrate_diffusion`], 4000 trajectories, 100 rounds).
pub const QSC_DIFFUSION: f64 = 0.042;

impl Default for QscConfig {
    fn default() -> Self {
        Self {
            n_cycles: 40,
            tau_min: 20.0,
            tau_max: 400.0,
            t_c: 125.0,
            t_c_optimum: 125.0,
            omega_c: 17.0,
            gain: 1.0,
            lock_gain: 0.16,
            capture_width: 100.0,
            diffusion: QSC_DIFFUSION,
            reset_duration: 200.0,
            pulse_duration: 3.0,
            contrast: (2.0 * c::OSP_FIDELITY - 1.0).powi(2),
            t1: c::ELECTRON_T1_US,
            resonance: c::DIFFERENCE_FREQUENCY_MHZ,
            resonance_width: 3.0,
        }
    }
}

impl QscConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cycles == 0 {
            return Err(Error::invalid("qsc.n_cycles", "must be >= 1"));
        }
        if !(self.tau_min > 0.0) {
            return Err(Error::invalid("qsc.tau_min", "must be > 0"));
        }
        if !(self.tau_max >= self.tau_min) {
            return Err(Error::invalid("qsc.tau_max", "must be >= tau_min"));
        }
        if !(self.t_c_optimum > 0.0) {
            return Err(Error::invalid("qsc.t_c_optimum", "must be > 0"));
        }
        if !(self.t1 > 0.0) {
            return Err(Error::invalid("qsc.t1", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.contrast) {
            return Err(Error::invalid("qsc.contrast", "must lie in [0, 1]"));
        }
        check_nonneg(&[
            ("qsc.t_c", self.t_c),
            ("qsc.omega_c", self.omega_c),
            ("qsc.gain", self.gain),
            ("qsc.lock_gain", self.lock_gain),
            ("qsc.capture_width", self.capture_width),
            ("qsc.diffusion", self.diffusion),
            ("qsc.reset_duration", self.reset_duration),
            ("qsc.pulse_duration", self.pulse_duration),
            ("qsc.resonance_width", self.resonance_width),
        ])
    }

    /// Sensing time of cycle `k` (linear ramp).
    pub fn tau_sense(&self, k: usize) -> f64 {
        if self.n_cycles == 1 {
            return self.tau_max;
        }
        self.tau_min + (self.tau_max - self.tau_min) * k as f64 / (self.n_cycles - 1) as f64
    }

    /// Contrast of the sensing measurement after free evolution `tau` ns.
    pub fn visibility(&self, tau: f64) -> f64 {
        self.contrast * (-tau * 1e-3 / (2.0 * self.t1)).exp()
    }

    fn efficiency(&self) -> f64 {
        resonance_efficiency(self.omega_c, self.resonance, self.resonance_width) * drive_response(self.t_c, self.t_c_optimum)
    }

    /// Expected detuning change of one cycle, MHz.
    pub fn drift(&self, delta: f64, tau: f64, a_c: f64) -> f64 {
        let eff = self.efficiency();
        let sensing = -self.gain * a_c * self.visibility(tau) * (TWO_PI * delta * tau * MHZ_NS).sin();
        let window = if self.capture_width > 0.0 {
            (-delta * delta / (2.0 * self.capture_width * self.capture_width)).exp()
        } else {
            0.0
        };
        let lock = -(self.lock_gain * self.t_c * 1e-3).min(1.0) * delta * window;
        eff * (sensing + lock)
    }

    /// Duration of one cycle, ns.
    pub fn cycle_duration(&self, k: usize) -> f64 {
        self.pulse_duration + self.tau_sense(k) + self.t_c + self.reset_duration
    }

    /// Duration of one protocol pass, µs.
    pub fn protocol_duration(&self) -> f64 {
        (0..self.n_cycles).map(|k| self.cycle_duration(k)).sum::<f64>() * 1e-3
    }
}

/// One sensing-and-feedback cycle. The drift is realised as an integer
/// number of nuclear flips of size `a_c` by stochastic rounding.
pub fn qsc_cycle(state: BathState, tau_sense: f64, cfg: &QscConfig, bath: &BathModel, rng: &mut SimRng) -> BathState {
    let drift = cfg.drift(state.delta, tau_sense, bath.a_c);
    let step = if bath.a_c > 0.0 {
        let k = drift / bath.a_c;
        let floor = k.floor();
        let flips = if rng.random::<f64>() < k - floor { floor + 1.0 } else { floor };
        flips * bath.a_c
    } else {
        drift
    };
    let delta = diffuse(state.delta + step, cfg.diffusion, bath.sigma_warm, rng);
    BathState { delta, ..state }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    Rabi(RabiCoolingConfig),
    Qsc(QscConfig),
}

impl Protocol {
    pub fn validate(&self) -> Result<()> {
        match self {
            Protocol::Rabi(c) => c.validate(),
            Protocol::Qsc(c) => c.validate(),
        }
    }

    /// Cycles in one protocol pass.
    pub fn cycles_per_round(&self) -> usize {
        match self {
            Protocol::Rabi(_) => 1,
            Protocol::Qsc(c) => c.n_cycles,
        }
    }

    fn tau_sense(&self, k: usize) -> f64 {
        match self {
            Protocol::Rabi(_) => 0.0,
            Protocol::Qsc(c) => c.tau_sense(k),
        }
    }

    fn step(&self, state: BathState, k: usize, bath: &BathModel, rng: &mut SimRng) -> BathState {
        match self {
            Protocol::Rabi(c) => rabi_cool_cycle(state, c, bath.sigma_warm, rng),
            Protocol::Qsc(c) => qsc_cycle(state, c.tau_sense(k), c, bath, rng),
        }
    }

    /// Duration of one protocol pass, µs.
    pub fn protocol_duration(&self) -> f64 {
        match self {
            Protocol::Rabi(c) => c.t_c * 1e-3,
            Protocol::Qsc(c) => c.protocol_duration(),
        }
    }
}

/// Ensemble settings for [`run_protocol`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSettings {
    /// Protocol passes, each followed by the measurement it prepares.
    pub rounds: usize,
    pub trajectories: usize,
    /// Trailing rounds averaged for the steady-state width.
    pub average_rounds: usize,
    /// Width of the starting distribution; the warm width when absent.
    pub initial_sigma: Option<f64>,
    pub seed: u64,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        Self {
            rounds: 100,
            trajectories: 2000,
            average_rounds: 50,
            initial_sigma: None,
            seed: 1,
        }
    }
}

impl EnsembleSettings {
    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::invalid("ensemble.rounds", "must be >= 1"));
        }
        if self.trajectories < 2 {
            return Err(Error::invalid("ensemble.trajectories", "must be >= 2"));
        }
        if self.average_rounds == 0 || self.average_rounds > self.rounds {
            return Err(Error::invalid("ensemble.average_rounds", "must lie in [1, rounds]"));
        }
        if let Some(s) = self.initial_sigma {
            check_nonneg(&[("ensemble.initial_sigma", s)])?;
        }
        Ok(())
    }
}

/// Ensemble statistics after one cooling cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Global cycle index, starting at 1.
    pub cycle: usize,
    pub tau_sense: f64,
    pub sigma_now: f64,
    pub mean_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingResult {
    /// Per-cycle ensemble statistics averaged over repetitions; row 0 is
    /// the starting distribution.
    pub trace: Vec<TraceRow>,
    /// Steady-state width, MHz (RMS over repetitions and trailing rounds).
    pub final_sigma: f64,
    /// Ensemble mean at the end of the run, MHz.
    pub final_mean: f64,
    /// Standard error of `final_mean`, MHz.
    pub mean_stderr: f64,
    /// Experiment time of one protocol pass, µs.
    pub experiment_time: f64,
}

impl CoolingResult {
    pub const CSV_HEADER: &'static str = "cycle,tau_sense,sigma_now,mean_delta";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.trace {
            writeln!(w, "{},{},{},{}", r.cycle, r.tau_sense, r.sigma_now, r.mean_delta)?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    /// Steady-state T2*, ns.
    pub fn final_t2_star(&self) -> f64 {
        crate::units::t2_star_from_sigma(self.final_sigma)
    }
}

/// Per-cycle Σδ and Σδ² over a chunk of trajectories.
struct ChunkStats {
    sum: Vec<f64>,
    sum2: Vec<f64>,
}

fn run_ensemble(protocol: &Protocol, bath: &BathModel, settings: &EnsembleSettings, rep: u64) -> (Vec<f64>, Vec<f64>) {
    let per_round = protocol.cycles_per_round();
    let total = settings.rounds * per_round;
    let sigma0 = settings.initial_sigma.unwrap_or(bath.sigma_warm);
    let chunks: Vec<ChunkStats> = (0..settings.trajectories.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut stats = ChunkStats {
                sum: vec![0.0; total + 1],
                sum2: vec![0.0; total + 1],
            };
            let lo = chunk * CHUNK;
            let hi = (lo + CHUNK).min(settings.trajectories);
            for traj in lo..hi {
                let mut rng = substream(settings.seed, &[tag::TRAJECTORY, rep, traj as u64]);
                let z: f64 = rng.sample(StandardNormal);
                let mut state = BathState {
                    delta: sigma0 * z,
                    sigma_now: sigma0,
                    offset: 0.0,
                };
                stats.sum[0] += state.delta;
                stats.sum2[0] += state.delta * state.delta;
                for i in 0..total {
                    state = protocol.step(state, i % per_round, bath, &mut rng);
                    stats.sum[i + 1] += state.delta;
                    stats.sum2[i + 1] += state.delta * state.delta;
                }
            }
            stats
        })
        .collect();
    let mut sum = vec![0.0; total + 1];
    let mut sum2 = vec![0.0; total + 1];
    for ch in &chunks {
        for i in 0..=total {
            sum[i] += ch.sum[i];
            sum2[i] += ch.sum2[i];
        }
    }
    (sum, sum2)
}

/// Runs `reps` independent ensembles of the interleaved protocol and
/// reports the width trace and its steady state.
pub fn run_protocol(protocol: &Protocol, reps: usize, bath: &BathModel, settings: &EnsembleSettings) -> Result<CoolingResult> {
    if reps == 0 {
        return Err(Error::invalid("reps", "must be >= 1"));
    }
    protocol.validate()?;
    bath.validate()?;
    settings.validate()?;
    let per_round = protocol.cycles_per_round();
    let total = settings.rounds * per_round;
    let n = settings.trajectories as f64;

    let mut var_acc = vec![0.0; total + 1];
    let mut mean_acc = vec![0.0; total + 1];
    let mut steady_var = 0.0;
    let mut final_mean = 0.0;
    let mut final_var = 0.0;
    for rep in 0..reps {
        let (sum, sum2) = run_ensemble(protocol, bath, settings, rep as u64);
        for i in 0..=total {
            let mean = sum[i] / n;
            let var = ((sum2[i] - n * mean * mean) / (n - 1.0)).max(0.0);
            mean_acc[i] += mean;
            var_acc[i] += var;
        }
        let first = settings.rounds - settings.average_rounds;
        for round in first..settings.rounds {
            let i = (round + 1) * per_round;
            let mean = sum[i] / n;
            steady_var += ((sum2[i] - n * mean * mean) / (n - 1.0)).max(0.0);
        }
        let mean = sum[total] / n;
        final_mean += mean;
        final_var += ((sum2[total] - n * mean * mean) / (n - 1.0)).max(0.0);
    }
    let r = reps as f64;
    let trace = (0..=total)
        .map(|i| TraceRow {
            cycle: i,
            tau_sense: if i == 0 { 0.0 } else { protocol.tau_sense((i - 1) % per_round) },
            sigma_now: (var_acc[i] / r).sqrt(),
            mean_delta: mean_acc[i] / r,
        })
        .collect();
    Ok(CoolingResult {
        trace,
        final_sigma: (steady_var / (r * settings.average_rounds as f64)).sqrt(),
        final_mean: final_mean / r,
        mean_stderr: (final_var / r / (n * r)).sqrt(),
        experiment_time: protocol.protocol_duration(),
    })
}

/// Finds the per-cycle diffusion that gives a steady-state width `target`
/// (MHz) by bisection on log D.
pub fn calibrate_diffusion(
    protocol: &Protocol,
    target: f64,
    bath: &BathModel,
    settings: &EnsembleSettings,
    iterations: usize,
) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::invalid("target", "must be > 0"));
    }
    let with = |d: f64| -> Protocol {
        match protocol {
            Protocol::Rabi(c) => Protocol::Rabi(RabiCoolingConfig { diffusion: d, ..c.clone() }),
            Protocol::Qsc(c) => Protocol::Qsc(QscConfig { diffusion: d, ..c.clone() }),
        }
    };
    let (mut lo, mut hi) = (1e-6f64.ln(), (bath.sigma_warm * bath.sigma_warm).ln());
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        let sigma = run_protocol(&with(mid.exp()), 1, bath, settings)?.final_sigma;
        if sigma > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rabi_drift_fixed_point_and_tails() {
        let cfg = RabiCoolingConfig::default();
        assert_eq!(cfg.drift(0.0), 0.0);
        assert!(cfg.drift(2000.0).abs() < 1e-50);
        assert!((cfg.drift(5.0) + cfg.drift(-5.0)).abs() < 1e-12);
        let shifted = RabiCoolingConfig {
            f_c_offset: 30.0,
            ..Default::default()
        };
        assert_eq!(shifted.drift(30.0), 0.0);
    }

    #[test]
    fn qsc_drift_is_odd() {
        let cfg = QscConfig::default();
        let tau = 100.0;
        let q = 1.0 / (4.0 * tau * MHZ_NS);
        assert_eq!(cfg.drift(0.0, tau, 0.13), 0.0);
        let (a, b) = (cfg.drift(q, tau, 0.13), cfg.drift(-q, tau, 0.13));
        assert!(a < 0.0);
        assert!((a + b).abs() < 1e-15);
    }

    #[test]
    fn schedule_is_linear() {
        let cfg = QscConfig::default();
        assert_eq!(cfg.tau_sense(0), 20.0);
        assert_eq!(cfg.tau_sense(39), 400.0);
        let d = cfg.tau_sense(1) - cfg.tau_sense(0);
        assert!((cfg.tau_sense(20) - cfg.tau_sense(19) - d).abs() < 1e-12);
    }

    #[test]
    fn one_pass_takes_about_22_us() {
        let t = QscConfig::default().protocol_duration();
        assert!((t - 22.0).abs() < 1.0, "{t}");
    }

    #[test]
    fn efficiency_peaks_at_resonance() {
        assert_eq!(resonance_efficiency(17.08, 17.08, 3.0), 1.0);
        assert!(resonance_efficiency(27.08, 17.08, 3.0) < 0.01);
        assert!((drive_response(125.0, 125.0) - 1.0).abs() < 1e-15);
        assert!(drive_response(60.0, 125.0) < drive_response(125.0, 125.0));
    }

    #[test]
    fn diffusion_alone_keeps_warm_width() {
        let bath = BathModel::default();
        let mut rng = substream(4, &[0]);
        let (mut s2, n) = (0.0, 200_000);
        for _ in 0..n {
            let d = 52.0 * rng.sample::<f64, _>(StandardNormal);
            let d = diffuse(d, 6.0, bath.sigma_warm, &mut rng);
            s2 += d * d;
        }
        assert!(((s2 / n as f64).sqrt() / 52.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_gain_leaves_warm_distribution() {
        let proto = Protocol::Rabi(RabiCoolingConfig {
            gain: 0.0,
            ..Default::default()
        });
        let settings = EnsembleSettings {
            rounds: 50,
            trajectories: 4000,
            average_rounds: 10,
            ..Default::default()
        };
        let res = run_protocol(&proto, 1, &BathModel::default(), &settings).unwrap();
        assert!((res.final_sigma / 52.0 - 1.0).abs() < 0.05, "{}", res.final_sigma);
    }

    #[test]
    fn reps_zero_rejected() {
        let proto = Protocol::Qsc(QscConfig::default());
        assert!(run_protocol(&proto, 0, &BathModel::default(), &EnsembleSettings::default()).is_err());
    }

    #[test]
    fn trace_is_thread_count_independent() {
        let proto = Protocol::Qsc(QscConfig::default());
        let settings = EnsembleSettings {
            rounds: 3,
            trajectories: 300,
            average_rounds: 1,
            ..Default::default()
        };
        let bath = BathModel::default();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| run_protocol(&proto, 1, &bath, &settings).unwrap());
        let b = four.install(|| run_protocol(&proto, 1, &bath, &settings).unwrap());
        assert_eq!(a.to_csv_string(), b.to_csv_string());
    }
}
