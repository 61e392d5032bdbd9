//! Pulse sequences and the Monte-Carlo shot engine.
//!
//! A shot draws an initial spin state and a bath trajectory, runs the
//! sequence element by element and records the outcome of the final
//! measurement. Shots own counter-derived random streams and are summed as
//! integers, so an envelope is identical for any thread count.

mod envelope;
mod experiments;

pub use envelope::{visibility, Envelope};
pub use experiments::*;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bath::{ou_step_integrated, ou_step_ns, BathModel, BathState};
use crate::bloch::{propagate, BlochVector, DriveSegment, Relaxation};
use crate::error::{Error, Result};
use crate::model::QubitParams;
use crate::rng::{substream, tag, SimRng};
use crate::units::{MHZ_NS, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PulseElement {
    /// Rotation by 2π·rabi·duration about the equatorial axis at `phase`.
    /// Instantaneous and detuning-free when the settings ask for ideal
    /// rotations, otherwise integrated like [`PulseElement::Drive`].
    Rotate { rabi: f64, phase: f64, duration: f64 },
    /// Finite drive integrated with the current detuning and drive-induced
    /// spin flips. `offset` shifts the drive frequency, MHz.
    Drive {
        rabi: f64,
        phase: f64,
        duration: f64,
        offset: f64,
    },
    /// Free precession, ns.
    Delay { duration: f64 },
    /// Optical spin pumping back into |↑⟩, ns.
    Reset { duration: f64 },
    Measure,
}

impl PulseElement {
    pub fn duration(&self) -> f64 {
        match *self {
            PulseElement::Rotate { duration, .. }
            | PulseElement::Drive { duration, .. }
            | PulseElement::Delay { duration }
            | PulseElement::Reset { duration } => duration,
            PulseElement::Measure => 0.0,
        }
    }

    /// Rotation of `angle` rad at Rabi frequency `rabi`.
    pub fn rotation(angle: f64, phase: f64, rabi: f64) -> Self {
        PulseElement::Rotate {
            rabi,
            phase,
            duration: angle / (TWO_PI * rabi * MHZ_NS),
        }
    }
}

/// Ordered pulse elements plus a frame offset (f_c − f_probe, MHz) that
/// adds to the bath detuning throughout.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PulseSequence {
    pub elements: Vec<PulseElement>,
    pub frame_offset: f64,
}

impl PulseSequence {
    pub fn new(elements: Vec<PulseElement>) -> Self {
        Self {
            elements,
            frame_offset: 0.0,
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.frame_offset = offset;
        self
    }

    pub fn duration(&self) -> f64 {
        self.elements.iter().map(PulseElement::duration).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.elements.iter().enumerate() {
            let d = e.duration();
            if !(d >= 0.0) || !d.is_finite() {
                return Err(Error::invalid(format!("sequence.elements[{i}].duration"), "must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// Initialization and readout imperfections.
///
/// Initialization prepares |↑⟩ with probability `osp_fidelity`; readout
/// reports the right state with the same probability. The bright
/// probability is `dark_floor + contrast · P(report ↓)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementModel {
    pub osp_fidelity: f64,
    pub dark_floor: f64,
    pub contrast: f64,
}

impl Default for MeasurementModel {
    fn default() -> Self {
        Self::from_qubit(&QubitParams::default())
    }
}

impl MeasurementModel {
    pub fn from_qubit(q: &QubitParams) -> Self {
        Self {
            osp_fidelity: q.osp_fidelity,
            dark_floor: 0.0,
            contrast: 1.0,
        }
    }

    pub const PERFECT: Self = Self {
        osp_fidelity: 1.0,
        dark_floor: 0.0,
        contrast: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("measurement.osp_fidelity", self.osp_fidelity),
            ("measurement.dark_floor", self.dark_floor),
            ("measurement.contrast", self.contrast),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(name, "must lie in [0, 1]"));
            }
        }
        if self.dark_floor + self.contrast > 1.0 + 1e-12 {
            return Err(Error::invalid("measurement.contrast", "dark_floor + contrast must not exceed 1"));
        }
        Ok(())
    }

    /// Spin-pumped initial state.
    pub fn initialize<R: Rng + ?Sized>(&self, rng: &mut R) -> BlochVector {
        if self.osp_fidelity >= 1.0 || rng.random::<f64>() < self.osp_fidelity {
            BlochVector::UP
        } else {
            BlochVector::DOWN
        }
    }

    /// Probability of a bright (photon) event given the spin state.
    pub fn bright_probability(&self, state: &BlochVector) -> f64 {
        let p = state.p_down();
        let f = self.osp_fidelity;
        let reported_down = f * p + (1.0 - f) * (1.0 - p);
        (self.dark_floor + self.contrast * reported_down).clamp(0.0, 1.0)
    }
}

/// Shot-level settings shared by the experiment runners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub shots: usize,
    pub seed: u64,
    /// Treat `Rotate` elements as instantaneous perfect rotations.
    pub ideal_rotations: bool,
    /// Rabi frequency of the π/2 and π pulses, MHz.
    pub pulse_rabi: f64,
    pub measurement: MeasurementModel,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            shots: 10_000,
            seed: 1,
            ideal_rotations: true,
            pulse_rabi: 100.0,
            measurement: MeasurementModel::default(),
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::invalid("shots", "must be >= 1"));
        }
        if !(self.pulse_rabi > 0.0) {
            return Err(Error::invalid("pulse_rabi", "must be > 0"));
        }
        self.measurement.validate()
    }
}

/// Runs sequences shot by shot against a qubit and a bath.
#[derive(Debug, Clone)]
pub struct ShotEngine<'a> {
    pub qubit: &'a QubitParams,
    pub bath: &'a BathModel,
    pub settings: RunSettings,
    relax: Relaxation,
}

impl<'a> ShotEngine<'a> {
    pub fn new(qubit: &'a QubitParams, bath: &'a BathModel, settings: RunSettings) -> Self {
        Self {
            qubit,
            bath,
            settings,
            relax: Relaxation::new(qubit.t1, qubit.thermal_z()),
        }
    }

    pub fn relaxation(&self) -> Relaxation {
        self.relax
    }

    /// Random stream of shot `shot` at sweep point `point`.
    pub fn shot_rng(&self, point: u64, shot: u64) -> SimRng {
        substream(self.settings.seed, &[tag::SHOT, point, shot])
    }

    /// Runs one shot; returns the bright/dark outcome of the last measurement.
    pub fn run_shot(&self, seq: &PulseSequence, rng: &mut SimRng) -> bool {
        let meas = &self.settings.measurement;
        let mut spin = meas.initialize(rng);
        let mut bath = self.bath.sample_state(rng);
        let mut outcome = false;
        for el in &seq.elements {
            match *el {
                PulseElement::Rotate { rabi, phase, duration } if self.settings.ideal_rotations => {
                    let angle = TWO_PI * rabi * duration * MHZ_NS;
                    spin = spin.rotated_equatorial(angle, phase.rem_euclid(TWO_PI));
                    bath = ou_step_ns(bath, duration, self.bath, rng);
                }
                PulseElement::Rotate { rabi, phase, duration } => {
                    spin = self.drive(spin, &bath, rabi, phase, duration, seq.frame_offset);
                    bath = ou_step_ns(bath, duration, self.bath, rng);
                }
                PulseElement::Drive {
                    rabi,
                    phase,
                    duration,
                    offset,
                } => {
                    spin = self.drive(spin, &bath, rabi, phase, duration, seq.frame_offset + offset);
                    bath = ou_step_ns(bath, duration, self.bath, rng);
                }
                PulseElement::Delay { duration } => {
                    let (next, integral) = ou_step_integrated(bath, duration, self.bath, rng);
                    if duration > 0.0 {
                        let mean_detuning = integral / duration + seq.frame_offset;
                        spin = propagate(spin, &DriveSegment::free(mean_detuning, duration), &self.relax);
                    }
                    bath = next;
                }
                PulseElement::Reset { duration } => {
                    spin = meas.initialize(rng);
                    bath = ou_step_ns(bath, duration, self.bath, rng);
                }
                PulseElement::Measure => {
                    outcome = rng.random::<f64>() < meas.bright_probability(&spin);
                    spin = if outcome { BlochVector::DOWN } else { BlochVector::UP };
                }
            }
        }
        outcome
    }

    fn drive(&self, spin: BlochVector, bath: &BathState, rabi: f64, phase: f64, duration: f64, offset: f64) -> BlochVector {
        let seg = DriveSegment {
            rabi,
            detuning: bath.delta + offset,
            phase: phase.rem_euclid(TWO_PI),
            duration,
            flip_rate: self.qubit.flip_rate(rabi),
        };
        propagate(spin, &seg, &self.relax)
    }

    /// Number of bright outcomes over all shots at sweep point `point`.
    pub fn bright_count(&self, point: u64, seq: &PulseSequence) -> u64 {
        (0..self.settings.shots as u64)
            .into_par_iter()
            .map(|shot| {
                let mut rng = self.shot_rng(point, shot);
                u64::from(self.run_shot(seq, &mut rng))
            })
            .sum()
    }

    /// Bright fraction at sweep point `point`.
    pub fn bright_fraction(&self, point: u64, seq: &PulseSequence) -> f64 {
        self.bright_count(point, seq) as f64 / self.settings.shots as f64
    }
}
