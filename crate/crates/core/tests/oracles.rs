//! Builder and analytics results checked against independent closed forms.

use faer::{Mat, Side};
use omx_core::analytics::{phonon_nonlinearity, six_state_g2, transistor_error, transistor_tau_exact};
use omx_core::dynamics::{evolve, steady_state};
use omx_core::hilbert::{expect, fock_density, number_op, thermal_state, FockState, ModeKind, Operator};
use omx_core::models::{
    build_displaced, build_effective_phonon, build_full, build_nonhermitian, build_rwa, hybridize,
    steady_alpha, EffectiveOptions, SystemParams, Truncations,
};
use omx_core::C64;

fn one_photon_levels(h: &Operator) -> Vec<f64> {
    let space = h.space();
    let keep: Vec<usize> = (0..space.total_dim())
        .filter(|&i| {
            let occ = space.occupations_of(i);
            space
                .modes()
                .iter()
                .zip(&occ)
                .filter(|(m, _)| m.kind == ModeKind::Optical)
                .map(|(_, n)| n)
                .sum::<usize>()
                == 1
        })
        .collect();
    let dense = h.to_dense();
    let block = Mat::from_fn(keep.len(), keep.len(), |i, j| dense[(keep[i], keep[j])]);
    let mut v: Vec<f64> = block.self_adjoint_eigenvalues(Side::Lower).unwrap().into_iter().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn uncoupled_cavities_follow_linear_response() {
    // ⟨c⟩ solves (iM + κ)c = -iΩ with M the tunnelling matrix; the state is coherent.
    let (j, dc, kappa) = (0.8, 0.3, 1.0);
    let (o1, o2) = (0.15, -0.05);
    let p = SystemParams {
        g0: Some(0.0),
        j: Some(j),
        delta_s: Some(dc + j),
        omega_m: Some(5.0),
        drive_1: Some(o1),
        drive_2: Some(o2),
        gamma: Some(0.1),
        ..Default::default()
    };
    let model = build_full(&p, Truncations::new(4, 4, 2)).unwrap();
    let i = C64::new(0.0, 1.0);
    let (a11, a12) = (i * (-dc) + kappa, i * (-j));
    let det = a11 * a11 - a12 * a12;
    let (r1, r2) = (-i * o1, -i * o2);
    let c1 = (a11 * r1 - a12 * r2) / det;
    let c2 = (a11 * r2 - a12 * r1) / det;
    let ss = steady_state(&model).unwrap();
    let n1 = expect(&ss.state, &number_op(model.space(), "c1").unwrap()).unwrap().re;
    let n2 = expect(&ss.state, &number_op(model.space(), "c2").unwrap()).unwrap().re;
    assert!((n1 - c1.norm_sqr()).abs() < 1e-6 * c1.norm_sqr().max(1e-3), "{n1} vs {}", c1.norm_sqr());
    assert!((n2 - c2.norm_sqr()).abs() < 1e-6 * c2.norm_sqr().max(1e-3));
}

#[test]
fn tunnelling_splits_normal_modes_by_2j() {
    let j = 1.7;
    let p = SystemParams {
        g0: Some(0.0),
        j: Some(j),
        delta_s: Some(j),
        omega_m: Some(30.0),
        ..Default::default()
    };
    let model = build_full(&p, Truncations::new(2, 2, 2)).unwrap();
    let levels = one_photon_levels(model.hamiltonian());
    assert_eq!(levels.len(), 4);
    assert!((levels[1] - levels[0] - 2.0 * j).abs() < 1e-12);
}

#[test]
fn steady_field_is_the_fixed_point() {
    let (o, ds, k) = (0.4, -1.3, 0.7);
    let mut a = C64::new(0.0, 0.0);
    let f = |a: C64| C64::new(-k, ds) * a + o;
    let h = 1e-3;
    for _ in 0..40_000 {
        let k1 = f(a);
        let k2 = f(a + k1 * (h / 2.0));
        let k3 = f(a + k2 * (h / 2.0));
        let k4 = f(a + k3 * h);
        a += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
    }
    assert!((a - steady_alpha(o, ds, k)).norm() < 1e-10);
}

#[test]
fn displaced_linear_coupling_is_g0_alpha_over_2() {
    let p = SystemParams {
        g0: Some(0.6),
        alpha: Some(1.4),
        omega_m: Some(10.0),
        delta_a: Some(-15.0),
        delta_s: Some(-1.0),
        ..Default::default()
    };
    let model = build_displaced(&p, Truncations::new(2, 2, 2)).unwrap();
    let s = model.space();
    let from = FockState::with(s, &[("m", 1)]).unwrap().index();
    let to = FockState::with(s, &[("a", 1)]).unwrap().index();
    let h = model.hamiltonian().matrix();
    assert!((h.get(to, from).re - 0.6 * 1.4 / 2.0).abs() < 1e-14);
}

#[test]
fn mixing_angles_satisfy_their_defining_relations() {
    for (g0, alpha, fd) in [(1.0, 1.0, 5.0), (2.0, 0.7, -3.0), (0.3, 2.0, 0.4)] {
        let base = SystemParams {
            g0: Some(g0),
            alpha: Some(alpha),
            frame_delta: Some(fd),
            omega_m: Some(10.0),
            delta_s: Some(-1.0),
            ..Default::default()
        };
        let f = hybridize(&base).unwrap();
        let g = g0 * alpha / 2.0;
        assert!(((2.0 * f.theta).tan() + 2.0 * g / fd).abs() < 1e-12);
        assert!((f.gamma_prime - 2.0 * (f.theta.sin()).powi(2)).abs() < 1e-15);
        let two = SystemParams {
            omega_m2: Some(10.0 + 2.0 * fd),
            ..base
        };
        let f2 = hybridize(&two).unwrap();
        let big = f2.big_theta.unwrap();
        assert!(((2.0 * big).tan() + 2f64.sqrt() * g / fd).abs() < 1e-12);
        assert!((f2.gamma_prime - (2.0 * big).sin().powi(2)).abs() < 1e-15);
    }
}

#[test]
fn shifted_frequency_at_g_equal_delta_over_five() {
    // Eigenvalues of [[ω_m + δ, G], [G, ω_m]] in (c_a, b); the mechanical branch
    // moves away from ω_m + δ.
    for delta in [5.0f64, -5.0] {
        let w = 10.0;
        let g = delta.abs() / 5.0;
        let p = SystemParams {
            g0: Some(2.0 * g),
            alpha: Some(1.0),
            frame_delta: Some(delta),
            omega_m: Some(w),
            delta_s: Some(-1.0),
            ..Default::default()
        };
        let f = hybridize(&p).unwrap();
        let root = (delta * delta + 4.0 * g * g).sqrt();
        let mech = if delta > 0.0 { w + (delta - root) / 2.0 } else { w + (delta + root) / 2.0 };
        assert!((f.tilde_omega_m[0] - mech).abs() < 1e-12);
        // Eigenvalues sum to the trace 2ω_m + δ; the optical branch is -Δ̃_a.
        assert!((mech - f.tilde_delta_a - (2.0 * w + delta)).abs() < 1e-12);
    }
}

#[test]
fn leakage_matches_small_angle_form() {
    for ratio in [1e-3, 1e-2, 5e-2] {
        let fd = 5.0;
        let p = SystemParams {
            g0: Some(2.0 * ratio * fd),
            alpha: Some(1.0),
            frame_delta: Some(fd),
            omega_m: Some(10.0),
            delta_s: Some(-1.0),
            ..Default::default()
        };
        let corrected = phonon_nonlinearity(&p, true).unwrap().gamma_prime.unwrap();
        let plain = phonon_nonlinearity(&p, false).unwrap().gamma_prime.unwrap();
        // γ' = 2κ sin²θ = 2κθ²(1 + O(θ²)) with θ ≈ -G/δ.
        assert!(((corrected - plain) / plain).abs() < 4.0 * ratio * ratio, "ratio {ratio}");
    }
}

#[test]
fn two_mode_expansion_contains_cross_term() {
    let p = SystemParams {
        g0: Some(1.0),
        kappa: 0.02,
        alpha: Some(1.0),
        frame_delta: Some(3.0),
        omega_m: Some(0.0),
        omega_m2: Some(6.0),
        delta_s: Some(-0.5),
        ..Default::default()
    };
    let model = build_effective_phonon(
        &p,
        3,
        EffectiveOptions {
            corrected: false,
            co_rotating: true,
        },
    )
    .unwrap();
    let lambda = phonon_nonlinearity(&p, false).unwrap().lambda.unwrap();
    let s = model.space();
    let e = |n1, n2| {
        let k = FockState::new(s, vec![n1, n2]).unwrap().index();
        model.hamiltonian().matrix().get(k, k).re
    };
    let cross = e(1, 1) - e(1, 0) - e(0, 1) + e(0, 0);
    assert!((cross + 2.0 * lambda).abs() < 1e-15);
}

#[test]
fn field_free_effective_model_is_the_thermal_bath() {
    let p = SystemParams {
        g0: Some(1.0),
        alpha: Some(0.0),
        frame_delta: Some(5.0),
        omega_m: Some(10.0),
        delta_s: Some(-1.0),
        kappa: 0.025,
        gamma: Some(0.01),
        n_th: Some(0.3),
        ..Default::default()
    };
    let model = build_effective_phonon(&p, 12, EffectiveOptions::default()).unwrap();
    let ss = steady_state(&model).unwrap();
    let thermal = thermal_state(model.space(), &[("B", 0.3)]).unwrap();
    assert!(ss.state.trace_distance(&thermal).unwrap() < 1e-9);
}

#[test]
fn field_free_nonhermitian_spectrum_is_block_diagonal() {
    // α = 0: optical and mechanical modes decouple; eigenvalues are sums of
    // -Δ_s n_s - Δ_a n_a - iκ(n_s + n_a) and n(ω_m - iγ(2N+1)/2) - iγN/2.
    let (ds, da, w, kappa, gamma, n_th) = (-1.0, -15.0, 10.0, 0.5, 0.02, 1.0);
    let p = SystemParams {
        g0: Some(0.0),
        alpha: Some(0.0),
        omega_m: Some(w),
        delta_a: Some(da),
        delta_s: Some(ds),
        kappa,
        gamma: Some(gamma),
        n_th: Some(n_th),
        ..Default::default()
    };
    let h = build_nonhermitian(&p, Truncations::new(2, 2, 3)).unwrap();
    let dense = h.to_dense();
    let eig = dense.eigen().unwrap();
    let mut got: Vec<C64> = eig.S().column_vector().iter().copied().collect();
    let mut want = Vec::new();
    for na in 0..2 {
        for ns in 0..2 {
            for nm in 0..3 {
                let (na, ns, nm) = (na as f64, ns as f64, nm as f64);
                want.push(C64::new(
                    -ds * ns - da * na + w * nm,
                    -kappa * (ns + na) - gamma / 2.0 * (2.0 * n_th + 1.0) * nm - gamma / 2.0 * n_th,
                ));
            }
        }
    }
    let key = |z: &C64| (z.re * 1e6).round() as i64 * 1_000_000 + (z.im * 1e6).round() as i64;
    got.sort_by_key(key);
    want.sort_by_key(key);
    for (a, b) in got.iter().zip(&want) {
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }
}

#[test]
fn six_state_matches_full_model_off_resonance() {
    // δ = 0 RWA model with weak mechanical damping for a unique steady state.
    for da in [-2.5, 1.0, 5.0] {
        let p = SystemParams {
            g0: Some(4.0),
            delta_a: Some(da),
            omega_m: Some(20.0),
            delta_s: Some(da + 20.0),
            drive_a: Some(0.01),
            gamma: Some(0.01),
            ..Default::default()
        };
        let model = build_rwa(&p, Truncations::new(4, 4, 5)).unwrap();
        let ss = steady_state(&model).unwrap();
        let full = omx_core::dynamics::g2_zero(&ss.state, "a").unwrap();
        let six = six_state_g2(&p, 1).unwrap().g2_zero;
        assert!(((six - full) / full).abs() < 0.1, "Δ_a = {da}: {six} vs {full}");
    }
}

#[test]
fn long_time_evolution_reaches_the_steady_state() {
    let p = SystemParams {
        g0: Some(2.0),
        delta_a: Some(-1.0),
        omega_m: Some(4.0),
        delta_s: Some(3.0),
        drive_a: Some(0.3),
        gamma: Some(0.5),
        n_th: Some(0.2),
        ..Default::default()
    };
    let model = build_rwa(&p, Truncations::new(3, 3, 4)).unwrap();
    let ss = steady_state(&model).unwrap();
    let rho0 = fock_density(&FockState::vacuum(model.space()));
    let late = evolve(&model, &rho0, &[80.0]).unwrap();
    assert!(late[0].trace_distance(&ss.state).unwrap() < 1e-6);
}

#[test]
fn transistor_optimum_from_cube_root() {
    // Γ_m/2π = 20 kHz, κ/2π = 5 MHz: (κ²Γ_m)^{1/3}/2π = 0.794 MHz.
    let kappa = 1.0;
    let gm = 20e3 / 5e6;
    let p = SystemParams {
        g0: Some(10.0),
        gamma_m: Some(gm),
        ..Default::default()
    };
    let b = transistor_error(&p).unwrap();
    let scale_mhz = 5.0 / b.tau_scaling.unwrap();
    assert!((scale_mhz - 0.794).abs() < 1e-3);
    // The exact minimizer, cross-checked by a dense 1-D search.
    let eps = |t: f64| 4.0 / 100.0 + 1.0 / (t * kappa).powi(2) + t * gm;
    let best = (1..200_000)
        .map(|k| k as f64 * 1e-4)
        .min_by(|a, b| eps(*a).total_cmp(&eps(*b)))
        .unwrap();
    assert!((best - transistor_tau_exact(kappa, gm)).abs() < 1e-3);
    assert_eq!(b.tau_opt.unwrap(), transistor_tau_exact(kappa, gm));
}
