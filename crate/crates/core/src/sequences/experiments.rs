//! The pulse-sequence experiments: Rabi, chevron, Ramsey (plain, serrodyne
//! and detuned), CPMG, T1 pump-probe and phase control.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Envelope, PulseElement, PulseSequence, RunSettings, ShotEngine};
use crate::bath::{BathModel, BathState};
use crate::bloch::{DriveSegment, SegmentMap};
use crate::error::{Error, Result};
use crate::model::QubitParams;
use crate::rng::{substream, tag, SimRng};
use crate::units::{MHZ_NS, TWO_PI};

/// Default spin-pumping pulse, ns.
pub const RESET_DURATION: f64 = 200.0;

fn check_grid(name: &str, grid: &[f64], ascending: bool) -> Result<()> {
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(name, "values must be finite"));
    }
    if ascending && grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid(name, "must be ascending"));
    }
    if ascending && grid.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::invalid(name, "must be >= 0"));
    }
    Ok(())
}

/// Drive parameters of a Rabi measurement, MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RabiDrive {
    pub omega: f64,
    /// Δ = f_Z − f_probe.
    pub detuning: f64,
    /// AC-Stark offset δ_AC; the spin sees Δ − δ_AC + δ.
    pub ac_stark: f64,
}

impl Default for RabiDrive {
    fn default() -> Self {
        Self {
            omega: 130.0,
            detuning: 0.0,
            ac_stark: 0.0,
        }
    }
}

/// Resonant or detuned Rabi oscillations against drive time (ns).
pub fn run_rabi(
    qubit: &QubitParams,
    bath: &BathModel,
    drive: &RabiDrive,
    t_grid: &[f64],
    settings: &RunSettings,
) -> Result<Envelope> {
    run_rabi_conditioned(qubit, bath, drive, t_grid, settings, 0, |_, _| {})
}

/// [`run_rabi`] with a per-shot hook that may modify the bath before the
/// drive starts (used for drive-locked detuning scans). `stream`
/// distinguishes independent scans under the same seed.
pub fn run_rabi_conditioned<F>(
    qubit: &QubitParams,
    bath: &BathModel,
    drive: &RabiDrive,
    t_grid: &[f64],
    settings: &RunSettings,
    stream: u64,
    condition: F,
) -> Result<Envelope>
where
    F: Fn(&mut BathState, &mut SimRng) + Sync,
{
    settings.validate()?;
    check_grid("t_grid", t_grid, true)?;
    if !(drive.omega >= 0.0) {
        return Err(Error::invalid("omega", "must be >= 0"));
    }
    let engine = ShotEngine::new(qubit, bath, *settings);
    let relax = engine.relaxation();
    let meas = settings.measurement;
    let flip_rate = qubit.flip_rate(drive.omega);
    let n = t_grid.len();

    let counts = (0..settings.shots as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, shot| {
                let mut rng = substream(settings.seed, &[tag::SHOT, u64::MAX - stream, shot]);
                let mut spin = meas.initialize(&mut rng);
                let mut state = bath.sample_state(&mut rng);
                condition(&mut state, &mut rng);
                let seg = |dt: f64| DriveSegment {
                    rabi: drive.omega,
                    detuning: drive.detuning - drive.ac_stark + state.delta,
                    phase: 0.0,
                    duration: dt,
                    flip_rate,
                };
                let mut t_prev = 0.0;
                let mut cached: Option<(f64, SegmentMap)> = None;
                for (i, &t) in t_grid.iter().enumerate() {
                    let dt = t - t_prev;
                    if dt > 0.0 {
                        let map = match cached {
                            Some((d, m)) if (d - dt).abs() <= 1e-12 * dt => m,
                            _ => {
                                let m = SegmentMap::new(&seg(dt), &relax);
                                cached = Some((dt, m));
                                m
                            }
                        };
                        spin = map.apply(spin);
                    }
                    t_prev = t;
                    if rand::Rng::random::<f64>(&mut rng) < meas.bright_probability(&spin) {
                        acc[i] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let shots = settings.shots as f64;
    let top = counts.iter().map(|&c| c as f64 / shots).collect();
    Ok(Envelope::new(t_grid.to_vec(), top, vec![0.0; n], settings.shots))
}

/// Rabi oscillations over a (detuning, time) grid; one envelope per detuning.
pub fn run_chevron<F>(
    qubit: &QubitParams,
    bath: &BathModel,
    omega: f64,
    ac_stark: f64,
    detunings: &[f64],
    t_grid: &[f64],
    settings: &RunSettings,
    condition: F,
) -> Result<Vec<Envelope>>
where
    F: Fn(f64, &mut BathState, &mut SimRng) + Sync,
{
    check_grid("detunings", detunings, false)?;
    detunings
        .iter()
        .enumerate()
        .map(|(row, &detuning)| {
            let drive = RabiDrive {
                omega,
                detuning,
                ac_stark,
            };
            run_rabi_conditioned(qubit, bath, &drive, t_grid, settings, row as u64, |s, r| {
                condition(detuning, s, r)
            })
        })
        .collect()
}

/// π/2 — τ — π/2(φ) Ramsey sequence.
pub fn ramsey_sequence(tau: f64, final_phase: f64, rabi: f64) -> PulseSequence {
    PulseSequence::new(vec![
        PulseElement::rotation(PI / 2.0, 0.0, rabi),
        PulseElement::Delay { duration: tau },
        PulseElement::rotation(PI / 2.0, final_phase, rabi),
        PulseElement::Measure,
    ])
}

/// Serrodyne phase of the final pulse: a linear ramp at `serrodyne` MHz.
pub fn serrodyne_phase(serrodyne: f64, tau: f64) -> f64 {
    TWO_PI * serrodyne * tau * MHZ_NS
}

fn top_bottom<B>(engine: &ShotEngine<'_>, grid: &[f64], point_base: u64, build: B) -> (Vec<f64>, Vec<f64>)
where
    B: Fn(f64, f64) -> PulseSequence,
{
    grid.iter()
        .enumerate()
        .map(|(i, &x)| {
            let point = point_base + i as u64;
            let top = engine.bright_fraction(point, &build(x, 0.0));
            let bottom = engine.bright_fraction(point, &build(x, PI));
            (top, bottom)
        })
        .unzip()
}

/// Ramsey interferometry against free-evolution time τ (ns), with a
/// serrodyne phase ramp on the final pulse.
pub fn run_ramsey(
    qubit: &QubitParams,
    bath: &BathModel,
    tau_grid: &[f64],
    serrodyne: f64,
    settings: &RunSettings,
) -> Result<Envelope> {
    run_ramsey_shifted(qubit, bath, tau_grid, serrodyne, 0.0, settings)
}

/// [`run_ramsey`] with an extra constant phase on the final pulse.
pub fn run_ramsey_shifted(
    qubit: &QubitParams,
    bath: &BathModel,
    tau_grid: &[f64],
    serrodyne: f64,
    extra_phase: f64,
    settings: &RunSettings,
) -> Result<Envelope> {
    settings.validate()?;
    check_grid("tau_grid", tau_grid, true)?;
    let engine = ShotEngine::new(qubit, bath, *settings);
    let rabi = settings.pulse_rabi;
    let (top, bottom) = top_bottom(&engine, tau_grid, 0, |tau, variant| {
        ramsey_sequence(tau, serrodyne_phase(serrodyne, tau) + extra_phase + variant, rabi)
    });
    Ok(Envelope::new(tau_grid.to_vec(), top, bottom, settings.shots))
}

/// Ramsey maps against the probe offset Δ = f_c − f_probe (MHz) for a bath
/// already narrowed around f_c. One envelope per offset.
pub fn run_detuned_ramsey(
    qubit: &QubitParams,
    cooled_bath: &BathModel,
    offsets: &[f64],
    tau_grid: &[f64],
    settings: &RunSettings,
) -> Result<Vec<Envelope>> {
    settings.validate()?;
    check_grid("tau_grid", tau_grid, true)?;
    check_grid("offsets", offsets, false)?;
    let engine = ShotEngine::new(qubit, cooled_bath, *settings);
    let rabi = settings.pulse_rabi;
    Ok(offsets
        .iter()
        .enumerate()
        .map(|(j, &offset)| {
            let base = (j * tau_grid.len()) as u64;
            let (top, bottom) = top_bottom(&engine, tau_grid, base, |tau, variant| {
                ramsey_sequence(tau, variant, rabi).with_offset(offset)
            });
            Envelope::new(tau_grid.to_vec(), top, bottom, settings.shots)
        })
        .collect())
}

/// How the CPMG total time relates to the π-pulse spacing τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CpmgConvention {
    /// t = N_π·τ
    #[default]
    NTau,
    /// t = 2·N_π·τ
    TwoNTau,
}

impl CpmgConvention {
    pub fn spacing(self, total: f64, n_pi: usize) -> f64 {
        match self {
            CpmgConvention::NTau => total / n_pi as f64,
            CpmgConvention::TwoNTau => total / (2 * n_pi) as f64,
        }
    }
}

/// π/2_x — [τ/2 — π_y — τ/2]×N — π/2(φ) with total free evolution `total`.
pub fn cpmg_sequence(n_pi: usize, total: f64, convention: CpmgConvention, final_phase: f64, rabi: f64) -> PulseSequence {
    let tau = convention.spacing(total, n_pi);
    let mut el = Vec::with_capacity(2 * n_pi + 4);
    el.push(PulseElement::rotation(PI / 2.0, 0.0, rabi));
    el.push(PulseElement::Delay { duration: tau / 2.0 });
    for k in 0..n_pi {
        el.push(PulseElement::rotation(PI, PI / 2.0, rabi));
        let gap = if k + 1 == n_pi { tau / 2.0 } else { tau };
        el.push(PulseElement::Delay { duration: gap });
    }
    el.push(PulseElement::rotation(PI / 2.0, final_phase, rabi));
    el.push(PulseElement::Measure);
    PulseSequence::new(el)
}

/// CPMG decoupling against total sequence time (ns).
pub fn run_cpmg(
    qubit: &QubitParams,
    bath: &BathModel,
    n_pi: usize,
    t_grid: &[f64],
    convention: CpmgConvention,
    settings: &RunSettings,
) -> Result<Envelope> {
    if n_pi == 0 {
        return Err(Error::invalid("n_pi", "must be >= 1"));
    }
    settings.validate()?;
    check_grid("t_grid", t_grid, true)?;
    let engine = ShotEngine::new(qubit, bath, *settings);
    let rabi = settings.pulse_rabi;
    let (top, bottom) = top_bottom(&engine, t_grid, 0, |t, variant| {
        cpmg_sequence(n_pi, t, convention, variant, rabi)
    });
    Ok(Envelope::new(t_grid.to_vec(), top, bottom, settings.shots))
}

/// Pump-probe T1 measurement against delay τ (ns). `bottom` is the
/// zero-delay reference, so C(0) = 0.
pub fn run_t1_pumpprobe(qubit: &QubitParams, tau_grid: &[f64], settings: &RunSettings) -> Result<Envelope> {
    settings.validate()?;
    check_grid("tau_grid", tau_grid, true)?;
    let bath = BathModel::quasi_static(0.0);
    let engine = ShotEngine::new(qubit, &bath, *settings);
    let probe = |tau: f64| {
        PulseSequence::new(vec![
            PulseElement::Reset {
                duration: RESET_DURATION,
            },
            PulseElement::Delay { duration: tau },
            PulseElement::Measure,
        ])
    };
    let (top, bottom): (Vec<f64>, Vec<f64>) = tau_grid
        .iter()
        .enumerate()
        .map(|(i, &tau)| {
            let point = i as u64;
            (engine.bright_fraction(point, &probe(tau)), engine.bright_fraction(point, &probe(0.0)))
        })
        .unzip();
    Ok(Envelope::new(tau_grid.to_vec(), top, bottom, settings.shots))
}

/// Two back-to-back π/2 pulses, the second at phase φ (rad).
pub fn run_phase_sweep(qubit: &QubitParams, bath: &BathModel, phi_grid: &[f64], settings: &RunSettings) -> Result<Envelope> {
    settings.validate()?;
    check_grid("phi_grid", phi_grid, false)?;
    let engine = ShotEngine::new(qubit, bath, *settings);
    let rabi = settings.pulse_rabi;
    let (top, bottom) = top_bottom(&engine, phi_grid, 0, |phi, variant| {
        PulseSequence::new(vec![
            PulseElement::rotation(PI / 2.0, 0.0, rabi),
            PulseElement::rotation(PI / 2.0, phi + variant, rabi),
            PulseElement::Measure,
        ])
    });
    Ok(Envelope::new(phi_grid.to_vec(), top, bottom, settings.shots))
}

/// Uniform grid `start, start+step, …` with `n` points.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
    }
}
