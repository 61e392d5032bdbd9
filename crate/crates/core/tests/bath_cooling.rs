//! Statistics of the bath dynamics and the cooling protocols.

use overhauser_core::bath::{ou_step, rewarm, BathModel, BathState};
use overhauser_core::cooling::{run_protocol, EnsembleSettings, Protocol, QscConfig, RabiCoolingConfig};
use overhauser_core::rng::substream;

fn ou_bath() -> BathModel {
    BathModel {
        sigma_static: 0.0,
        sigma_dyn: 1.1,
        tau_corr: 100.0,
        ..BathModel::default()
    }
}

#[test]
fn ou_reaches_stationary_variance() {
    let bath = ou_bath();
    let n = 4000;
    let (mut samples, mut lagged) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for traj in 0..n {
        let mut rng = substream(99, &[traj as u64]);
        let mut s = BathState::at(0.0);
        for _ in 0..20 {
            s = ou_step(s, 100.0, &bath, &mut rng);
        }
        samples.push(s.delta);
        lagged.push(ou_step(s, 50.0, &bath, &mut rng).delta);
    }
    let var = samples.iter().map(|d| d * d).sum::<f64>() / n as f64;
    // n·s²/σ² ~ χ²(n) for a zero-mean sample
    let chi2 = n as f64 * var / (1.1 * 1.1);
    let k = n as f64;
    assert!((chi2 - k).abs() < 4.0 * (2.0 * k).sqrt(), "chi2 {chi2} for {k} dof");
    let corr = samples.iter().zip(&lagged).map(|(a, b)| a * b).sum::<f64>() / n as f64 / var;
    assert!((corr - (-0.5f64).exp()).abs() < 0.05, "lag correlation {corr}");
}

#[test]
fn rewarm_is_monotone_and_bounded() {
    let bath = BathModel::default();
    let mut last = 0.355;
    for i in 1..200 {
        let s = rewarm(0.355, i as f64 * 2.0, &bath);
        assert!(s >= last && s <= bath.sigma_warm);
        last = s;
    }
    assert!((rewarm(0.355, 1e5, &bath) - bath.sigma_warm).abs() < 1e-6);
    assert_eq!(rewarm(0.355, 0.0, &bath), 0.355);
}

fn ensemble() -> EnsembleSettings {
    EnsembleSettings {
        rounds: 60,
        trajectories: 1000,
        average_rounds: 30,
        seed: 4,
        ..EnsembleSettings::default()
    }
}

fn qsc_sigma(cfg: QscConfig) -> f64 {
    run_protocol(&Protocol::Qsc(cfg), 1, &BathModel::default(), &ensemble())
        .unwrap()
        .final_sigma
}

#[test]
fn cooling_leaves_mean_unbiased() {
    for protocol in [Protocol::Qsc(QscConfig::default()), Protocol::Rabi(RabiCoolingConfig::default())] {
        let r = run_protocol(&protocol, 2, &BathModel::default(), &ensemble()).unwrap();
        assert!(r.final_mean.abs() < 3.0 * r.mean_stderr, "{} ± {}", r.final_mean, r.mean_stderr);
    }
}

#[test]
fn rabi_cooling_width_falls_with_gain() {
    let widths: Vec<f64> = [0.05, 0.15, 0.5]
        .iter()
        .map(|&gain| {
            let cfg = RabiCoolingConfig {
                gain,
                ..RabiCoolingConfig::default()
            };
            run_protocol(&Protocol::Rabi(cfg), 1, &BathModel::default(), &ensemble())
                .unwrap()
                .final_sigma
        })
        .collect();
    assert!(widths.windows(2).all(|w| w[1] < w[0]), "{widths:?}");
}

#[test]
fn detuned_cooling_drive_degrades() {
    let best = qsc_sigma(QscConfig::default());
    for omega_c in [7.0, 27.0] {
        let s = qsc_sigma(QscConfig {
            omega_c,
            ..QscConfig::default()
        });
        assert!(s > 10.0 * best, "Ω_c {omega_c}: {s} vs {best}");
    }
}

#[test]
fn sensing_time_has_interior_optimum() {
    let widths: Vec<f64> = [100.0, 200.0, 400.0, 800.0]
        .iter()
        .map(|&tau_max| {
            qsc_sigma(QscConfig {
                tau_max,
                ..QscConfig::default()
            })
        })
        .collect();
    let best = widths.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(best, widths[2], "{widths:?}");
}
