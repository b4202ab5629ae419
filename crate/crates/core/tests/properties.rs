use omx_core::analytics::{min_g2, phonon_nonlinearity, six_state_g2, transistor_epsilon, transistor_error};
use omx_core::dynamics::{evolve, liouvillian, steady_state, trace_defect, LindbladModel};
use omx_core::hilbert::{annihilator, fock_density, FockState, Mode, ModeSpace, Operator};
use omx_core::models::SystemParams;
use omx_core::C64;
use proptest::prelude::*;

fn random_model(w: f64, g: f64, drive: f64, k1: f64, k2: f64, nth: f64) -> LindbladModel {
    let s = ModeSpace::new(vec![Mode::optical("a", 3), Mode::mechanical("m", 3)]).unwrap();
    let a = annihilator(&s, "a").unwrap();
    let b = annihilator(&s, "m").unwrap();
    let na = &a.dag() * &a;
    let h = &(&(&na * &(&b + &b.dag())).scale(g) + &(&b.dag() * &b).scale(w)) + &a.plus_hc().scale(drive);
    let h = h.into_hermitian().unwrap();
    LindbladModel::new(
        h,
        vec![(a, k1), (b.clone(), k2 * (nth + 1.0)), (b.dag(), k2 * nth)],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn liouvillian_columns_preserve_trace(
        w in -5.0..5.0f64, g in -2.0..2.0f64, drive in -1.0..1.0f64,
        k1 in 0.0..2.0f64, k2 in 0.0..1.0f64, nth in 0.0..2.0f64,
    ) {
        let m = random_model(w, g, drive, k1, k2, nth);
        prop_assert!(trace_defect(&liouvillian(&m), 9) < 1e-10);
    }

    #[test]
    fn evolution_keeps_a_valid_state(
        w in -3.0..3.0f64, g in -1.0..1.0f64, drive in -0.5..0.5f64,
        k1 in 0.1..1.0f64, k2 in 0.05..0.5f64, nth in 0.0..1.0f64,
    ) {
        let m = random_model(w, g, drive, k1, k2, nth);
        let rho0 = fock_density(&FockState::with(m.space(), &[("a", 1), ("m", 1)]).unwrap());
        for rho in evolve(&m, &rho0, &[0.5, 1.5, 3.0]).unwrap() {
            prop_assert!((rho.trace().re - 1.0).abs() <= 1e-8);
            prop_assert!(rho.min_eigenvalue().unwrap() >= -1e-8);
        }
    }

    #[test]
    fn steady_state_is_unique_and_physical(
        w in -3.0..3.0f64, g in -1.0..1.0f64, drive in -0.5..0.5f64,
        k1 in 0.1..1.0f64, k2 in 0.05..0.5f64, nth in 0.0..1.0f64,
    ) {
        let m = random_model(w, g, drive, k1, k2, nth);
        let ss = steady_state(&m).unwrap();
        prop_assert!(ss.sigma_min > 1e-8);
        prop_assert!(ss.state.min_eigenvalue().unwrap() >= -1e-8);
        prop_assert!(ss.residual <= 1e-9);
    }

    #[test]
    fn six_state_g2_ignores_drive_strength(
        g0 in 0.0..30.0f64, da in -20.0..20.0f64, nth in 0.0..2.0f64,
        o1 in 1e-4..0.1f64, factor in 0.01..100.0f64,
    ) {
        let p = SystemParams { g0: Some(g0), delta_a: Some(da), n_th: Some(nth), drive_a: Some(o1), ..Default::default() };
        let q = SystemParams { drive_a: Some(o1 * factor), ..p.clone() };
        let a = six_state_g2(&p, 20).unwrap().g2_zero;
        let b = six_state_g2(&q, 20).unwrap().g2_zero;
        prop_assert!(((a - b) / a).abs() < 1e-12);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn min_g2_is_dimensionless(g0 in 2.0..16.0f64, scale in 0.1..10.0f64) {
        let p = SystemParams { g0: Some(g0), ..Default::default() };
        let q = SystemParams { g0: Some(g0 * scale), kappa: scale, ..Default::default() };
        let a = min_g2(&p).unwrap();
        let b = min_g2(&q).unwrap();
        prop_assert!(((a.g2 - b.g2) / a.g2).abs() < 1e-9);
        prop_assert!((a.delta_a - b.delta_a / scale).abs() < 1e-6);
    }

    #[test]
    fn transistor_optimum_beats_log_grid(g0 in 3.0..100.0f64, gm in 1e-5..1e-1f64) {
        let b = transistor_error(&SystemParams { g0: Some(g0), gamma_m: Some(gm), ..Default::default() }).unwrap();
        let tau = b.tau_opt.unwrap();
        let e0 = transistor_epsilon(g0, 1.0, gm, tau);
        for k in -40..=40 {
            let t = tau * 10f64.powf(k as f64 / 20.0);
            prop_assert!(transistor_epsilon(g0, 1.0, gm, t) >= e0);
        }
    }

    #[test]
    fn coherent_to_dissipative_ratio_is_detuning_over_kappa(
        ds in prop_oneof![-5.0..-0.05f64, 0.05..5.0f64], kappa in 0.01..1.0f64,
        alpha in 0.1..2.0f64, fd in 2.0..10.0f64,
    ) {
        let p = SystemParams {
            g0: Some(1.0), kappa, alpha: Some(alpha), delta_s: Some(ds),
            frame_delta: Some(fd), omega_m: Some(20.0), ..Default::default()
        };
        let b = phonon_nonlinearity(&p, false).unwrap();
        prop_assert!((b.lambda.unwrap() / b.gamma_phi.unwrap() - ds / kappa).abs() < 1e-9 * (ds / kappa).abs());
    }

    #[test]
    fn hermitian_part_commutes_with_its_adjoint(re in -2.0..2.0f64, im in -2.0..2.0f64) {
        let s = ModeSpace::new(vec![Mode::optical("a", 4)]).unwrap();
        let a = annihilator(&s, "a").unwrap();
        let x = a.scale_complex(C64::new(re, im)).plus_hc();
        prop_assert!(x.hermiticity_defect() < 1e-14);
        prop_assert!(Operator::max_abs(&x.commutator(&x.dag())) < 1e-12);
    }
}
