use kerrloss::analytic::f_function_direct;
use kerrloss::*;
use proptest::prelude::*;

fn cut(n: usize) -> FockCutoff {
    FockCutoff::new(n).unwrap()
}

#[test]
fn lossless_cross_kerr_phase_pattern() {
    // with γ = d = 0 every element picks up exp{iχt(km − ln)} only
    let (a1, a2) = (CoherentAmplitude::new(0.6, 0.2), CoherentAmplitude::new(-0.3, 0.5));
    let (chi, t) = (0.8, 1.3);
    let c = cut(10);
    let rho = evolve_exact(a1, a2, t, &KerrLossParams::cross_kerr(chi), c).unwrap();
    let rho0 = tensor_product(&coherent_density(a1, c).unwrap(), &coherent_density(a2, c).unwrap()).unwrap();
    for (k, l, m, n) in [(1, 0, 2, 0), (3, 1, 0, 2), (2, 2, 1, 3), (4, 0, 0, 4)] {
        let phase = C64::new(0.0, chi * t * (k * m) as f64 - chi * t * (l * n) as f64).exp();
        let want = rho0.get(k, l, m, n) * phase;
        assert!((rho.get(k, l, m, n) - want).norm() < 1e-12, "({k},{l},{m},{n})");
    }
}

#[test]
fn pure_loss_gives_damped_coherent_product() {
    let p = KerrLossParams::cross_kerr(0.0).with_loss(0.7, 1.9);
    let (a1, a2) = (CoherentAmplitude::new(1.1, 0.0), CoherentAmplitude::new(0.0, -0.9));
    let c = cut(14);
    let t = 0.8;
    let rho = evolve_exact(a1, a2, t, &p, c).unwrap();
    let want = tensor_product(
        &single_mode_decay(a1, 0.7, t, c).unwrap().normalized(),
        &single_mode_decay(a2, 1.9, t, c).unwrap().normalized(),
    )
    .unwrap()
    .normalized();
    assert!(rho.max_abs_diff(&want) < 1e-12);
}

#[test]
fn dephasing_ratio_law() {
    let (d1, t) = (0.7, 0.9);
    let p = KerrLossParams::cross_kerr(0.0).with_dephasing(d1, 0.0);
    let a = CoherentAmplitude::new(0.8, 0.3);
    let c = cut(10);
    let rho = evolve_exact(a, 0.0.into(), t, &p, c).unwrap();
    let rho0 = tensor_product(&coherent_density(a, c).unwrap(), &coherent_density(0.0.into(), c).unwrap()).unwrap();
    for k in 0..6 {
        for l in 0..6 {
            let ratio = rho.get(k, l, 0, 0) / rho0.get(k, l, 0, 0);
            let want = (-0.5 * d1 * ((k as f64 - l as f64).powi(2)) * t).exp();
            assert!((ratio - C64::new(want, 0.0)).norm() < 1e-9);
        }
    }
}

#[test]
fn long_time_purity_revival() {
    let p = KerrLossParams::cross_kerr(0.05).with_loss(2.0, 2.0);
    let a = CoherentAmplitude::new(0.8, 0.0);
    let pur = purity_exact(a, a, 3.0, &p).unwrap();
    assert!(pur >= 0.99, "{pur}");
    // and it dipped on the way
    let mid = purity_exact(a, a, 0.5, &p).unwrap();
    assert!(mid < pur);
}

#[test]
fn purity_at_zero_time_is_one() {
    let p = KerrLossParams::cross_kerr(1.7).with_loss(0.4, 1.2);
    let pur = purity_exact(CoherentAmplitude::new(0.9, -0.4), CoherentAmplitude::new(0.2, 0.7), 0.0, &p).unwrap();
    assert!((pur - 1.0).abs() < 1e-9);
}

#[test]
fn short_and_long_time_forms_track_exact_state() {
    let a = CoherentAmplitude::new(0.5, 0.0);
    let c = cut(8);
    let p = KerrLossParams::cross_kerr(0.2).with_loss(0.1, 0.1);
    let t = 0.2;
    let (approx, report) = short_time_state(a, a, t, &p, c).unwrap();
    assert!(report.all_hold(), "{report:?}");
    let exact = evolve_exact(a, a, t, &p, c).unwrap();
    assert!(approx.overlap(&exact) > 1.0 - 1e-4);

    let p = KerrLossParams::cross_kerr(0.05).with_loss(2.0, 2.0);
    let t = 3.0;
    let (approx, report) = long_time_state(a, a, t, &p, c).unwrap();
    assert!(report.all_hold(), "{report:?}");
    let exact = evolve_exact(a, a, t, &p, c).unwrap();
    assert!(approx.overlap(&exact) > 1.0 - 1e-4);
}

#[test]
fn correlated_rates_rejected() {
    let p = KerrLossParams::cross_kerr(1.0).with_loss(1.0, 1.0).with_cross_loss(0.5);
    let r = evolve_exact(0.5.into(), 0.5.into(), 1.0, &p, cut(6));
    assert!(matches!(r, Err(KerrError::UncorrelatedOnly { .. })), "{r:?}");
}

#[test]
fn lambda_rates_are_fully_correlated() {
    let r = lambda_system_rates(0.3, 0.5, 10.0, -4.0, 2.0, 1.5, 0.8).unwrap();
    assert!((r.gamma1 * r.gamma2 - r.gamma12 * r.gamma12).abs() < 1e-15);
    assert!(r.params().validate().is_ok());
    assert!(matches!(
        lambda_system_rates(0.3, 0.5, 2.0, -4.0, 2.0, 1.5, 0.8),
        Err(KerrError::DegenerateDetuning(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn f_series_and_closed_form_agree(
        rate in 1e-4f64..5.0,
        index in -8i64..=8,
        chi in -2.0f64..2.0,
        alpha_sq in 0.0f64..4.0,
        t in 0.0f64..2.0,
    ) {
        let a = f_function(rate, index, chi, alpha_sq, t);
        let b = f_function_direct(rate, index, chi, alpha_sq, t);
        prop_assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()), "{a} vs {b}");
    }

    #[test]
    fn f_is_continuous_across_series_threshold(
        scale in 1e-8f64..1e-5,
        alpha_sq in 0.1f64..3.0,
        t in 0.1f64..2.0,
    ) {
        let rate = scale / t;
        let series_side = f_function(rate, 0, 0.3, alpha_sq, t);
        let direct = f_function_direct(rate, 0, 0.3, alpha_sq, t);
        prop_assert!((series_side - direct).norm() <= 1e-8 * direct.norm());
    }

    #[test]
    fn exact_state_is_physical(
        re1 in -1.0f64..1.0, im1 in -1.0f64..1.0,
        re2 in -1.0f64..1.0, im2 in -1.0f64..1.0,
        chi in 0.0f64..2.0, g1 in 0.0f64..2.0, g2 in 0.0f64..2.0,
        d1 in 0.0f64..1.0, d2 in 0.0f64..1.0, t in 0.0f64..1.0,
    ) {
        let a1 = CoherentAmplitude::new(re1 / 1.5, im1 / 1.5);
        let a2 = CoherentAmplitude::new(re2 / 1.5, im2 / 1.5);
        let p = KerrLossParams::cross_kerr(chi).with_loss(g1, g2).with_dephasing(d1, d2);
        let rho = evolve_exact(a1, a2, t, &p, cut(8)).unwrap();
        let diag = validate(&rho);
        prop_assert!(diag.is_physical(1e-10), "{diag:?}");
    }

    #[test]
    fn purity_matches_matrix_purity(
        re1 in -1.0f64..1.0, re2 in -1.0f64..1.0,
        chi in 0.0f64..2.0, g1 in 0.0f64..2.0, g2 in 0.0f64..2.0, t in 0.0f64..1.0,
    ) {
        let p = KerrLossParams::cross_kerr(chi).with_loss(g1, g2);
        let (a1, a2) = (CoherentAmplitude::new(re1, 0.3), CoherentAmplitude::new(re2, -0.2));
        let rho = evolve_exact(a1, a2, t, &p, cut(12)).unwrap();
        let want = purity(&rho);
        let got = purity_exact(a1, a2, t, &p).unwrap();
        prop_assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}
