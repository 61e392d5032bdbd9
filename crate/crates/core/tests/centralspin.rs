//! Hartmann–Hahn resonance of the few-spin model.

use overhauser_core::centralspin::{hh_scan, CentralSpinSystem};
use overhauser_core::sequences::linspace;

/// Generalized Rabi frequency at the transfer maximum.
fn resonance(a_nc: f64) -> f64 {
    let sys = CentralSpinSystem {
        omega_n: vec![21.9],
        a_col: vec![0.0],
        a_nc: vec![a_nc],
        rabi: 0.0,
        detuning: 2.0,
    };
    let grid = linspace(20.8, 22.8, 201);
    let scan = hh_scan(&sys, &grid, 2000.0).unwrap();
    let peak = scan
        .iter()
        .max_by(|a, b| a.delta_iz.abs().total_cmp(&b.delta_iz.abs()))
        .unwrap();
    (peak.omega.powi(2) + sys.detuning.powi(2)).sqrt()
}

#[test]
fn resonance_converges_to_larmor() {
    let offsets: Vec<f64> = [1.0, 0.3, 0.05].iter().map(|&a| (resonance(a) - 21.9).abs()).collect();
    assert!(offsets[2] < offsets[0]);
    assert!(offsets[2] < 0.03, "{offsets:?}");
}

#[test]
fn no_transfer_without_non_collinear_coupling() {
    let sys = CentralSpinSystem {
        omega_n: vec![21.9, 37.5],
        a_col: vec![0.5, 0.3],
        a_nc: vec![0.0, 0.0],
        rabi: 0.0,
        detuning: 2.0,
    };
    for p in hh_scan(&sys, &linspace(15.0, 40.0, 26), 2000.0).unwrap() {
        assert!(p.delta_iz.abs() < 1e-10);
    }
}
