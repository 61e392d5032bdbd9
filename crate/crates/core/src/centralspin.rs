//! Exact state-vector model of one driven electron coupled to a few
//! spin-1/2 nuclei.
//!
//! Rotating-frame Hamiltonian, in MHz:
//!
//! H = Ω S_x + Δ S_z + Σ_n [ω_n I_z⁽ⁿ⁾ + a_col,n S_z I_z⁽ⁿ⁾ + a_nc,n S_z I_x⁽ⁿ⁾]
//!
//! Basis index `e·2^N + b`, where `e = 0` is electron ↑ and bit `n` of `b`
//! set means nucleus `n` is ↓.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{MHZ_NS, TWO_PI};

pub const MAX_NUCLEI: usize = 8;

pub type QuantumState = DVector<Complex64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CentralSpinSystem {
    /// Nuclear Larmor frequencies, MHz.
    pub omega_n: Vec<f64>,
    /// Collinear couplings (S_z I_z), MHz.
    pub a_col: Vec<f64>,
    /// Non-collinear couplings (S_z I_x), MHz.
    pub a_nc: Vec<f64>,
    pub rabi: f64,
    pub detuning: f64,
}

impl Default for CentralSpinSystem {
    fn default() -> Self {
        Self {
            omega_n: vec![21.9],
            a_col: vec![0.5],
            a_nc: vec![0.5],
            rabi: 0.0,
            detuning: 2.0,
        }
    }
}

impl CentralSpinSystem {
    pub fn n_nuclei(&self) -> usize {
        self.omega_n.len()
    }

    pub fn dim(&self) -> usize {
        2 << self.n_nuclei()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_nuclei();
        if n > MAX_NUCLEI {
            return Err(Error::invalid("centralspin.omega_n", format!("at most {MAX_NUCLEI} nuclei")));
        }
        if self.a_col.len() != n || self.a_nc.len() != n {
            return Err(Error::invalid("centralspin.a_col", "a_col and a_nc need one entry per nucleus"));
        }
        let all = self.omega_n.iter().chain(&self.a_col).chain(&self.a_nc).chain([&self.rabi, &self.detuning]);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("centralspin", "frequencies must be finite"));
        }
        if self.rabi < 0.0 {
            return Err(Error::invalid("centralspin.rabi", "must be >= 0"));
        }
        Ok(())
    }
}

fn s_z(e: usize) -> f64 {
    if e == 0 {
        0.5
    } else {
        -0.5
    }
}

fn i_z(b: usize, n: usize) -> f64 {
    if b >> n & 1 == 0 {
        0.5
    } else {
        -0.5
    }
}

/// The (real symmetric) Hamiltonian in MHz.
pub fn build_hamiltonian(sys: &CentralSpinSystem) -> Result<DMatrix<f64>> {
    sys.validate()?;
    let n = sys.n_nuclei();
    let nb = 1usize << n;
    let mut h = DMatrix::zeros(2 * nb, 2 * nb);
    for e in 0..2 {
        let sz = s_z(e);
        for b in 0..nb {
            let i = e * nb + b;
            let mut diag = sys.detuning * sz;
            for k in 0..n {
                diag += sys.omega_n[k] * i_z(b, k) + sys.a_col[k] * sz * i_z(b, k);
                let j = e * nb + (b ^ (1 << k));
                h[(i, j)] += sys.a_nc[k] * sz * 0.5;
            }
            h[(i, i)] = diag;
            h[(i, (1 - e) * nb + b)] = sys.rabi * 0.5;
        }
    }
    Ok(h)
}

/// Time evolution by eigendecomposition.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigen: SymmetricEigen<f64, nalgebra::Dyn>,
}

impl Propagator {
    pub fn new(sys: &CentralSpinSystem) -> Result<Self> {
        Ok(Self {
            eigen: SymmetricEigen::new(build_hamiltonian(sys)?),
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigen.eigenvalues
    }

    /// ψ(t) = exp(−i 2π H t) ψ, t in ns.
    pub fn evolve(&self, state: &QuantumState, t: f64) -> QuantumState {
        let v = &self.eigen.eigenvectors;
        let mut coeff: QuantumState = v.transpose().map(Complex64::from) * state;
        for (c, &e) in coeff.iter_mut().zip(self.eigen.eigenvalues.iter()) {
            *c *= Complex64::from_polar(1.0, -TWO_PI * e * t * MHZ_NS);
        }
        v.map(Complex64::from) * coeff
    }
}

/// Evolves `state` for `t` ns under `sys`.
pub fn evolve(state: &QuantumState, sys: &CentralSpinSystem, t: f64) -> Result<QuantumState> {
    Ok(Propagator::new(sys)?.evolve(state, t))
}

/// Product state with the electron in `electron` (0 = ↑) and nuclei in
/// basis state `nuclei`.
pub fn basis_state(sys: &CentralSpinSystem, electron: usize, nuclei: usize) -> QuantumState {
    let nb = 1usize << sys.n_nuclei();
    let mut psi = QuantumState::zeros(2 * nb);
    psi[electron * nb + (nuclei % nb)] = Complex64::new(1.0, 0.0);
    psi
}

/// ⟨I_z⁽ⁿ⁾⟩ for every nucleus.
pub fn nuclear_iz(state: &QuantumState, n_nuclei: usize) -> Vec<f64> {
    let nb = 1usize << n_nuclei;
    let mut out = vec![0.0; n_nuclei];
    for (i, a) in state.iter().enumerate() {
        let p = a.norm_sqr();
        for (k, o) in out.iter_mut().enumerate() {
            *o += p * i_z(i % nb, k);
        }
    }
    out
}

/// ⟨S_z⟩ of the electron.
pub fn electron_sz(state: &QuantumState) -> f64 {
    let nb = state.len() / 2;
    state.iter().enumerate().map(|(i, a)| a.norm_sqr() * s_z(i / nb)).sum()
}

/// ⟨H⟩ in MHz.
pub fn energy(state: &QuantumState, h: &DMatrix<f64>) -> f64 {
    let hc = h.map(Complex64::from);
    state.dotc(&(hc * state)).re
}

/// One point of a Hartmann–Hahn transfer curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransferPoint {
    pub omega: f64,
    /// Change of Σ⟨I_z⟩ after the drive.
    pub delta_iz: f64,
}

/// Polarization transfer against drive Rabi frequency. The electron starts
/// in ↑ and the nuclei in the fully mixed state (average over basis states).
pub fn hh_scan(template: &CentralSpinSystem, omega_grid: &[f64], t_drive: f64) -> Result<Vec<TransferPoint>> {
    template.validate()?;
    if !(t_drive >= 0.0) {
        return Err(Error::invalid("t_drive", "must be >= 0"));
    }
    if omega_grid.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
        return Err(Error::invalid("omega_grid", "values must be finite and >= 0"));
    }
    let n = template.n_nuclei();
    let nb = 1usize << n;
    omega_grid
        .par_iter()
        .map(|&omega| {
            let sys = CentralSpinSystem {
                rabi: omega,
                ..template.clone()
            };
            let prop = Propagator::new(&sys)?;
            let mut total = 0.0;
            for b in 0..nb {
                let psi0 = basis_state(&sys, 0, b);
                let before: f64 = nuclear_iz(&psi0, n).iter().sum();
                let after: f64 = nuclear_iz(&prop.evolve(&psi0, t_drive), n).iter().sum();
                total += after - before;
            }
            Ok(TransferPoint {
                omega,
                delta_iz: total / nb as f64,
            })
        })
        .collect()
}

pub const TRANSFER_CSV_HEADER: &str = "omega,delta_iz";

pub fn write_transfer_csv<W: Write>(points: &[TransferPoint], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{TRANSFER_CSV_HEADER}")?;
    for p in points {
        writeln!(w, "{},{}", p.omega, p.delta_iz)?;
    }
    Ok(())
}
