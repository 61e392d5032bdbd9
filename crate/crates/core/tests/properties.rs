//! Property tests for the invariants of the pure kernels.

use std::f64::consts::PI;

use overhauser_core::analysis::{
    estimate_bath, fit_curve, metrics, pi_fidelity, visibility, AbundanceConvention, FitModel, FitResult,
};
use overhauser_core::bloch::{averaged_chevron, propagate, BlochVector, DriveSegment, Relaxation, SegmentMap};
use overhauser_core::centralspin::{basis_state, evolve, nuclear_iz, CentralSpinSystem};
use overhauser_core::cooling::{QscConfig, RabiCoolingConfig};
use overhauser_core::model::{default_gaas_registry, SpeciesRegistry};
use overhauser_core::sequences::Envelope;
use overhauser_core::units::{sigma_from_t2_star, t2_star_from_sigma};
use proptest::prelude::*;

fn unit_vector() -> impl Strategy<Value = BlochVector> {
    (0.0..PI, 0.0..2.0 * PI, 0.0..=1.0f64).prop_map(|(th, ph, r)| {
        BlochVector::new(r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos())
    })
}

fn segment() -> impl Strategy<Value = DriveSegment> {
    (0.0..200.0f64, -100.0..100.0f64, 0.0..2.0 * PI, 0.0..500.0f64, 0.0..2.0f64).prop_map(
        |(rabi, detuning, phase, duration, flip_rate)| DriveSegment {
            rabi,
            detuning,
            phase,
            duration,
            flip_rate,
        },
    )
}

fn dist(a: BlochVector, b: BlochVector) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
}

proptest! {
    #[test]
    fn bloch_norm_never_grows(b in unit_vector(), seg in segment(), t1 in 1.0..100.0f64) {
        let out = propagate(b, &seg, &Relaxation::new(t1, 0.0));
        prop_assert!(out.norm() <= b.norm() + 1e-12);
    }

    #[test]
    fn coherent_propagation_preserves_norm_and_composes(
        b in unit_vector(),
        seg in segment(),
        split in 0.0..1.0f64,
    ) {
        let seg = DriveSegment { flip_rate: 0.0, ..seg };
        let whole = propagate(b, &seg, &Relaxation::NONE);
        prop_assert!((whole.norm() - b.norm()).abs() < 1e-12);
        let first = DriveSegment { duration: seg.duration * split, ..seg };
        let second = DriveSegment { duration: seg.duration * (1.0 - split), ..seg };
        let parts = propagate(propagate(b, &first, &Relaxation::NONE), &second, &Relaxation::NONE);
        prop_assert!(dist(whole, parts) < 1e-9);
    }

    #[test]
    fn segment_maps_compose(b in unit_vector(), s1 in segment(), s2 in segment(), t1 in 1.0..100.0f64) {
        let relax = Relaxation::new(t1, 0.026);
        let (m1, m2) = (SegmentMap::new(&s1, &relax), SegmentMap::new(&s2, &relax));
        let direct = m2.apply(m1.apply(b));
        prop_assert!(dist(direct, m1.then(&m2).apply(b)) < 1e-12);
    }

    #[test]
    fn chevron_symmetric_about_stark_shift(
        t in 0.0..400.0f64,
        d in 0.0..40.0f64,
        omega in 1.0..20.0f64,
        sigma in 0.0..15.0f64,
        dac in -5.0..5.0f64,
    ) {
        let a = averaged_chevron(t, dac + d, omega, sigma, dac);
        let b = averaged_chevron(t, dac - d, omega, sigma, dac);
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn visibility_invariant_under_rescaling(
        pairs in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..50),
        k in 0.01..100.0f64,
    ) {
        let (down, up): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let c = visibility(&down, &up);
        let scaled = visibility(
            &down.iter().map(|v| v * k).collect::<Vec<_>>(),
            &up.iter().map(|v| v * k).collect::<Vec<_>>(),
        );
        for (a, b) in c.iter().zip(&scaled) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn feedback_maps_are_odd(delta in 0.0..200.0f64, tau in 20.0..800.0f64, a_c in 0.01..0.5f64) {
        let q = QscConfig::default();
        prop_assert!((q.drift(delta, tau, a_c) + q.drift(-delta, tau, a_c)).abs() < 1e-12);
        let r = RabiCoolingConfig::default();
        prop_assert!((r.drift(delta) + r.drift(-delta)).abs() < 1e-12);
    }

    #[test]
    fn pi_fidelity_monotone_and_bounded(q in 0.01..1e4f64, dq in 1e-3..10.0f64) {
        let (a, b) = (pi_fidelity(q).unwrap(), pi_fidelity(q + dq).unwrap());
        prop_assert!(a > 0.5 && a < 1.0);
        prop_assert!(b >= a);
    }

    #[test]
    fn quality_factor_is_two_t_f(t in 1.0..1e4f64, f in 1.0..500.0f64) {
        let m = metrics(t, f).unwrap();
        prop_assert!((m.q - 2.0 * t * f * 1e-3).abs() < 1e-9 * m.q);
    }

    #[test]
    fn estimator_scaling(t2 in 1.0..50.0f64) {
        let reg = default_gaas_registry();
        for conv in [AbundanceConvention::PerSublattice, AbundanceConvention::SiteFraction] {
            let a = estimate_bath(t2, &reg, None, conv).unwrap();
            let b = estimate_bath(2.0 * t2, &reg, None, conv).unwrap();
            prop_assert!((b.n_nuclei / a.n_nuclei - 4.0).abs() < 1e-9);
            // A_c·T2*·√N is a constant.
            let inv = |e: &overhauser_core::analysis::BathEstimate, t: f64| e.a_c * t * e.n_nuclei.sqrt();
            prop_assert!((inv(&a, t2) / inv(&b, 2.0 * t2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_t2_round_trip(t2 in 0.1..1e5f64) {
        prop_assert!((t2_star_from_sigma(sigma_from_t2_star(t2)) / t2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn larmor_scales_with_field(field in 0.1..10.0f64) {
        let base = default_gaas_registry();
        let scaled: SpeciesRegistry = base.at_field(field).unwrap();
        for (a, b) in base.species.iter().zip(&scaled.species) {
            prop_assert!((b.larmor - a.larmor * field / base.field).abs() < 1e-9 * a.larmor.max(1.0));
        }
    }

    #[test]
    fn envelope_csv_round_trip(
        rows in prop::collection::vec((-1e6..1e6f64, 0.0..1.0f64, 0.0..1.0f64), 1..30),
        shots in 1usize..100_000,
    ) {
        let sweep = rows.iter().map(|r| r.0).collect();
        let top = rows.iter().map(|r| r.1).collect();
        let bottom = rows.iter().map(|r| r.2).collect();
        let env = Envelope::new(sweep, top, bottom, shots);
        let text = env.to_csv_string();
        prop_assert_eq!(text.lines().count(), rows.len() + 1);
        prop_assert!(text.ends_with('\n'));
        prop_assert_eq!(Envelope::from_csv_str(&text).unwrap(), env);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fit_is_reparametrization_stable(a in 0.2..5.0f64, t in 20.0..200.0f64, model_ix in 0usize..3) {
        let model = [FitModel::Exponential, FitModel::Gaussian, FitModel::Recovery][model_ix];
        let params = [1.0, t];
        let x: Vec<f64> = (0..60).map(|i| i as f64 * 5.0).collect();
        let y: Vec<f64> = x.iter().map(|&v| model.eval(v, &params)).collect();
        let base = fit_curve(&x, &y, model).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * a).collect();
        let scaled = fit_curve(&xs, &y, model).unwrap();
        prop_assert!((scaled.time_constant() / (a * base.time_constant()) - 1.0).abs() < 1e-6);
        prop_assert!((base.time_constant() / t - 1.0).abs() < 1e-6);
    }

    #[test]
    fn fit_csv_round_trip(t in 1.0..1e4f64, amp in 0.1..2.0f64) {
        let fit = FitResult {
            model: FitModel::Gaussian,
            params: vec![amp, t],
            errors: vec![amp * 1e-3, t * 1e-2],
            residual: 1e-3 * t,
        };
        prop_assert_eq!(FitResult::from_csv_str(&fit.to_csv_string()).unwrap(), fit);
    }

    #[test]
    fn central_spin_unitary_and_collinear_conserving(
        w1 in 10.0..40.0f64,
        w2 in 10.0..40.0f64,
        c1 in -1.0..1.0f64,
        c2 in -1.0..1.0f64,
        rabi in 0.0..40.0f64,
        detuning in -5.0..5.0f64,
        t in 0.0..1000.0f64,
        start in 0usize..8,
    ) {
        let sys = CentralSpinSystem {
            omega_n: vec![w1, w2],
            a_col: vec![c1, c2],
            a_nc: vec![0.0, 0.0],
            rabi,
            detuning,
        };
        let psi = basis_state(&sys, start / 4, start % 4);
        let out = evolve(&psi, &sys, t).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-10 * (1.0 + t / 1000.0));
        let iz = |s: &overhauser_core::centralspin::QuantumState| nuclear_iz(s, 2).iter().sum::<f64>();
        prop_assert!((iz(&out) - iz(&psi)).abs() < 1e-9);
    }
}
