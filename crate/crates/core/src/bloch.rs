//! Rotating-frame Bloch dynamics of the driven electron spin.
//!
//! The spin obeys dB/dt = ω × B − γ_flip B − R(B − B_eq), where
//! ω = 2π(Ω cos φ, Ω sin φ, Δ), γ_flip is the drive-induced isotropic
//! depolarization rate and R the T1 channel (rate 1/T1 on z, 1/2T1 on x, y).
//! The equation is affine, so every segment is propagated exactly through
//! the exponential of its 4×4 augmented generator.

use nalgebra::{Matrix3, Matrix4, Vector3};
use serde::{Deserialize, Serialize};

use crate::quadrature::{GaussHermite, MAX_NODES};
use crate::units::{phase, MHZ_NS, NS_PER_US, TWO_PI};

/// Spin expectation values; z = +1 is |↑⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const UP: Self = Self { x: 0.0, y: 0.0, z: 1.0 };
    pub const DOWN: Self = Self { x: 0.0, y: 0.0, z: -1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Probability of finding the spin in |↓⟩ (the bright state).
    pub fn p_down(&self) -> f64 {
        (0.5 * (1.0 - self.z)).clamp(0.0, 1.0)
    }

    fn to_vec(self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    fn from_vec(v: Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    /// Instantaneous rotation by `angle` about the equatorial axis at `phase`.
    pub fn rotated_equatorial(self, angle: f64, phase: f64) -> Self {
        let axis = Vector3::new(phase.cos(), phase.sin(), 0.0);
        Self::from_vec(rodrigues(self.to_vec(), axis, angle))
    }
}

/// One piece of constant drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSegment {
    /// Rabi frequency Ω/2π, MHz.
    pub rabi: f64,
    /// Total detuning including the bath contribution, MHz.
    pub detuning: f64,
    /// Drive phase, rad.
    pub phase: f64,
    /// ns.
    pub duration: f64,
    /// Drive-induced spin-flip rate κ/2π, MHz.
    pub flip_rate: f64,
}

impl DriveSegment {
    /// Free precession at `detuning` for `duration` ns.
    pub fn free(detuning: f64, duration: f64) -> Self {
        Self {
            rabi: 0.0,
            detuning,
            phase: 0.0,
            duration,
            flip_rate: 0.0,
        }
    }
}

/// Longitudinal relaxation: T1 in µs (infinite disables it) and the
/// equilibrium z-polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Relaxation {
    pub t1: f64,
    pub z_eq: f64,
}

impl Relaxation {
    pub const NONE: Self = Self {
        t1: f64::INFINITY,
        z_eq: 0.0,
    };

    pub fn new(t1: f64, z_eq: f64) -> Self {
        Self { t1, z_eq }
    }

    /// Rate in ns⁻¹.
    fn rate(&self) -> f64 {
        if self.t1.is_finite() {
            1.0 / (self.t1 * NS_PER_US)
        } else {
            0.0
        }
    }
}

/// Exact affine map B ↦ M·B + c for one segment, reusable on many states.
#[derive(Debug, Clone, Copy)]
pub struct SegmentMap {
    m: Matrix3<f64>,
    c: Vector3<f64>,
}

impl SegmentMap {
    pub fn identity() -> Self {
        Self {
            m: Matrix3::identity(),
            c: Vector3::zeros(),
        }
    }

    pub fn new(seg: &DriveSegment, relax: &Relaxation) -> Self {
        let t = seg.duration.max(0.0);
        let gamma_flip = TWO_PI * seg.flip_rate * MHZ_NS;
        let r1 = relax.rate();
        let omega = Vector3::new(
            seg.rabi * seg.phase.cos(),
            seg.rabi * seg.phase.sin(),
            seg.detuning,
        ) * (TWO_PI * MHZ_NS);

        if t == 0.0 {
            return Self::identity();
        }

        if gamma_flip == 0.0 && r1 == 0.0 {
            let norm = omega.norm();
            let m = if norm == 0.0 {
                Matrix3::identity()
            } else {
                rotation_matrix(omega / norm, norm * t)
            };
            return Self { m, c: Vector3::zeros() };
        }

        if seg.rabi == 0.0 {
            // Precession about z commutes with both decay channels.
            let rot = rotation_matrix(Vector3::z(), omega[2] * t);
            let perp = (-(gamma_flip + 0.5 * r1) * t).exp();
            let long_rate = gamma_flip + r1;
            let long = (-long_rate * t).exp();
            let z_inf = if long_rate > 0.0 { r1 * relax.z_eq / long_rate } else { 0.0 };
            let decay = Matrix3::from_diagonal(&Vector3::new(perp, perp, long));
            return Self {
                m: decay * rot,
                c: Vector3::new(0.0, 0.0, z_inf * (1.0 - long)),
            };
        }

        let mut gen = Matrix4::zeros();
        let (wx, wy, wz) = (omega[0], omega[1], omega[2]);
        // ω × B
        gen[(0, 1)] = -wz;
        gen[(0, 2)] = wy;
        gen[(1, 0)] = wz;
        gen[(1, 2)] = -wx;
        gen[(2, 0)] = -wy;
        gen[(2, 1)] = wx;
        gen[(0, 0)] = -gamma_flip - 0.5 * r1;
        gen[(1, 1)] = -gamma_flip - 0.5 * r1;
        gen[(2, 2)] = -gamma_flip - r1;
        gen[(2, 3)] = r1 * relax.z_eq;
        let e = (gen * t).exp();
        Self {
            m: e.fixed_view::<3, 3>(0, 0).into_owned(),
            c: e.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }

    pub fn apply(&self, b: BlochVector) -> BlochVector {
        BlochVector::from_vec(self.m * b.to_vec() + self.c)
    }

    /// Map of `self` followed by `next`.
    pub fn then(&self, next: &SegmentMap) -> SegmentMap {
        SegmentMap {
            m: next.m * self.m,
            c: next.m * self.c + next.c,
        }
    }
}

/// Propagates `state` through one drive segment.
pub fn propagate(state: BlochVector, seg: &DriveSegment, relax: &Relaxation) -> BlochVector {
    SegmentMap::new(seg, relax).apply(state)
}

fn rotation_matrix(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    let k = axis.cross_matrix();
    Matrix3::identity() + k * s + k * k * (1.0 - c)
}

fn rodrigues(v: Vector3<f64>, axis: Vector3<f64>, angle: f64) -> Vector3<f64> {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(&v) * s + axis * axis.dot(&v) * (1.0 - c)
}

/// Closed-form spin-flip probability of a detuned Rabi drive starting in |↑⟩.
/// `t` in ns, `delta` and `omega` in MHz.
pub fn rabi_lineshape(t: f64, delta: f64, omega: f64) -> f64 {
    let w2 = omega * omega + delta * delta;
    if w2 == 0.0 {
        return 0.0;
    }
    let s = (0.5 * phase(w2.sqrt(), t)).sin();
    omega * omega / w2 * s * s
}

/// Number of Gauss–Hermite nodes that resolves the chevron integrand at
/// drive time `t` (ns) and spread `sigma` (MHz); never fewer than 64.
pub fn chevron_nodes(t: f64, sigma: f64) -> usize {
    let k = std::f64::consts::PI * t.abs() * MHZ_NS * std::f64::consts::SQRT_2 * sigma;
    let n = (0.5 * (k + 5.0).powi(2)).ceil() as usize;
    n.clamp(64, MAX_NODES)
}

/// Rabi lineshape averaged over a Gaussian Overhauser detuning
/// δ ~ N(0, σ²), with the drive offset by the AC-Stark shift `delta_ac`.
pub fn averaged_chevron(t: f64, delta: f64, omega: f64, sigma_oh: f64, delta_ac: f64) -> f64 {
    let center = delta - delta_ac;
    if sigma_oh == 0.0 {
        return rabi_lineshape(t, center, omega);
    }
    let gh = GaussHermite::cached(chevron_nodes(t, sigma_oh));
    gh.gaussian_mean(center, sigma_oh, |d| rabi_lineshape(t, d, omega))
}
