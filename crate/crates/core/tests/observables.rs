use kerrloss::observables::partial_transpose;
use kerrloss::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

fn cut(n: usize) -> FockCutoff {
    FockCutoff::new(n).unwrap()
}

fn product(a1: CoherentAmplitude, a2: CoherentAmplitude, c: FockCutoff) -> TwoModeDensity {
    tensor_product(&coherent_density(a1, c).unwrap(), &coherent_density(a2, c).unwrap()).unwrap()
}

/// Random mixed state `AA†/Tr` from a complex matrix.
fn random_single(c: FockCutoff, entries: &[(f64, f64)]) -> SingleModeDensity {
    let d = c.dim();
    let a = DMatrix::from_fn(d, d, |r, col| {
        let (re, im) = entries[(r * d + col) % entries.len()];
        C64::new(re, im) / (1.0 + (r + col) as f64)
    });
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    SingleModeDensity::new(m.unscale(tr), c).unwrap()
}

fn phase_rotate(rho: &TwoModeDensity, th1: f64, th2: f64) -> TwoModeDensity {
    let d = rho.cutoff().dim();
    let u = DVector::from_fn(d * d, |i, _| C64::from_polar(1.0, th1 * (i / d) as f64 + th2 * (i % d) as f64));
    let m = DMatrix::from_fn(d * d, d * d, |r, c| u[r] * rho.matrix()[(r, c)] * u[c].conj());
    TwoModeDensity::new(m, rho.cutoff(), true).unwrap()
}

#[test]
fn fock_one_wigner_and_q() {
    let c = cut(6);
    let one = SingleModeDensity::fock(1, c).unwrap();
    let grid = PhaseSpaceGrid::square(3.0, 31).unwrap();
    let w = wigner(&one, grid.clone());
    let q = q_function(&one, grid.clone());
    for (i, b) in grid.points().enumerate() {
        let r2 = b.norm_sqr();
        let w_want = 2.0 / PI * (4.0 * r2 - 1.0) * (-2.0 * r2).exp();
        let q_want = r2 * (-r2).exp() / PI;
        assert!((w.values[i] - w_want).abs() < 1e-12);
        assert!((q.values[i] - q_want).abs() < 1e-12);
    }
    let m = min_wigner(&one, PhaseSpaceGrid::square(5.0, 101).unwrap()).unwrap();
    assert!((m.value + 2.0 / PI).abs() < 1e-12 && m.at.norm() < 1e-12);
}

#[test]
fn half_loss_of_coherent_state_halves_the_amplitude() {
    let c = cut(30);
    let a0 = C64::new(1.2, -0.8);
    let rho = coherent_density(a0.into(), c).unwrap();
    let grid = PhaseSpaceGrid::square(4.0, 41).unwrap();
    let w = bs_half_loss_wigner(&rho, grid.clone());
    for (i, b) in grid.points().enumerate() {
        let want = 2.0 / PI * (-2.0 * (b - a0 / 2f64.sqrt()).norm_sqr()).exp();
        assert!((w.values[i] - want).abs() < 1e-10);
    }
    let vac = SingleModeDensity::fock(0, c).unwrap();
    let centred = PhaseSpaceGrid::square(1.0, 3).unwrap();
    assert!((bs_half_loss_wigner(&vac, centred).values[4] - 2.0 / PI).abs() < 1e-15);
}

#[test]
fn quadrature_projection_of_vacuum() {
    let c = cut(8);
    let vac = TwoModeDensity::vacuum(c);
    for x in [-1.3, 0.0, 0.4, 2.2] {
        let out = project_quadrature(&vac, ModeIndex::Second, x);
        assert!((out.probability_density - (-x * x).exp() / PI.sqrt()).abs() < 1e-14);
        assert!((out.state.normalized().get(0, 0).re - 1.0).abs() < 1e-14);
    }
}

#[test]
fn conditioning_a_product_leaves_the_other_factor() {
    let c = cut(10);
    let (a1, a2) = (CoherentAmplitude::new(0.7, 0.3), CoherentAmplitude::new(-0.5, 0.6));
    let rho = product(a1, a2, c);
    let want = coherent_density(a1, c).unwrap();
    for x in [-0.8, 0.5] {
        let got = project_quadrature(&rho, ModeIndex::Second, x).state.normalized();
        assert!((got.matrix() - want.matrix()).map(|z| z.norm()).max() < 1e-13);
    }
}

#[test]
fn negativity_of_reference_states() {
    let c = cut(1);
    assert!(negativity(&product(0.3.into(), CoherentAmplitude::new(0.0, 0.2), cut(4))).unwrap() < 1e-12);
    let mut psi = DVector::<C64>::zeros(4);
    psi[2] = C64::new(FRAC_1_SQRT_2, 0.0);
    psi[1] = C64::new(-FRAC_1_SQRT_2, 0.0);
    let singlet = TwoModeDensity::from_pure(&psi, c).unwrap();
    assert!((negativity(&singlet).unwrap() - 0.5).abs() < 1e-12);
    // classical mixture of products
    let mix = TwoModeDensity::new(
        TwoModeDensity::fock(1, 0, c).matrix().scale(0.4) + TwoModeDensity::fock(0, 1, c).matrix().scale(0.6),
        c,
        true,
    )
    .unwrap();
    assert!(negativity(&mix).unwrap() < 1e-12);
    // partial transpose twice is the identity
    let pt = partial_transpose(&singlet);
    let back = TwoModeDensity::new(pt, c, false).unwrap();
    assert!((partial_transpose(&back) - singlet.matrix()).norm() < 1e-15);
}

#[test]
fn panel_c_uncorrelated_loss_removes_negativity() {
    let p = KerrLossParams::symmetric_kerr(1.0).with_loss(3.0, 3.0);
    let a = CoherentAmplitude::new(4.0, 0.0);
    let cat = conditioned_cat(a, 0.0.into(), FRAC_PI_2, &p, FockCutoff::recommended(4.0)).unwrap();
    let m = min_wigner(&cat.state, PhaseSpaceGrid::square(7.0, 141).unwrap()).unwrap();
    assert!(m.value >= -1e-3, "{m:?}");
}

#[test]
fn crescent_state_is_negative() {
    let a = CoherentAmplitude::new(2.0, 0.0);
    let c = cut(16);
    let rho = evolve_exact(a, a, 0.1, &KerrLossParams::cross_kerr(1.0), c).unwrap();
    let out = project_quadrature(&rho, ModeIndex::Second, 0.0).state.normalized();
    let grid = PhaseSpaceGrid::square(5.0, 201).unwrap();
    let m = min_wigner(&out, grid.clone()).unwrap();
    assert!(m.value < -0.05, "{m:?}");
    let w = wigner(&out, grid.clone());
    assert!((w.riemann_integral() - 1.0).abs() < 5e-3);
    let bs = bs_half_loss_wigner(&out, grid);
    assert!(bs.min().0 >= -1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn q_and_half_loss_wigner_are_non_negative(entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)) {
        let rho = random_single(cut(8), &entries);
        let grid = PhaseSpaceGrid::square(3.0, 21).unwrap();
        prop_assert!(q_function(&rho, grid.clone()).min().0 >= -1e-12);
        prop_assert!(bs_half_loss_wigner(&rho, grid).min().0 >= -1e-12);
    }

    #[test]
    fn negativity_ignores_local_phases(
        re1 in -0.9f64..0.9, re2 in -0.9f64..0.9, chi in 0.2f64..2.0, g in 0.0f64..1.0,
        th1 in 0.0f64..6.3, th2 in 0.0f64..6.3,
    ) {
        let p = KerrLossParams::cross_kerr(chi).with_loss(g, 0.5 * g);
        let rho = evolve_exact(CoherentAmplitude::new(re1, 0.2), CoherentAmplitude::new(re2, -0.1), 1.0, &p, cut(7)).unwrap();
        let n0 = negativity(&rho).unwrap();
        let n1 = negativity(&phase_rotate(&rho, th1, th2)).unwrap();
        prop_assert!((n0 - n1).abs() < 1e-10);
        prop_assert!(n0 >= -1e-10);
    }

    #[test]
    fn quadrature_densities_integrate_to_one(
        re1 in -1.0f64..1.0, re2 in -1.0f64..1.0, chi in 0.0f64..2.0, t in 0.0f64..1.0,
    ) {
        let rho = evolve_exact(CoherentAmplitude::new(re1, 0.3), CoherentAmplitude::new(re2, 0.4), t, &KerrLossParams::cross_kerr(chi), cut(9)).unwrap();
        let n = 801;
        let h = 16.0 / (n - 1) as f64;
        let total: f64 = (0..n)
            .map(|i| {
                let x = -8.0 + h * i as f64;
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                w * project_quadrature(&rho, ModeIndex::Second, x).probability_density
            })
            .sum::<f64>()
            * h;
        prop_assert!((total - 1.0).abs() < 1e-4, "{total}");
    }

    #[test]
    fn wigner_grid_normalization(entries in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40)) {
        let rho = random_single(cut(6), &entries);
        let w = wigner(&rho, PhaseSpaceGrid::square(5.0, 81).unwrap());
        let integral = w.riemann_integral();
        prop_assert!((0.995..=1.005).contains(&integral), "{integral}");
    }
}
