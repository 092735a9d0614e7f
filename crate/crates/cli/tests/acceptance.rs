//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::f64::consts::{FRAC_PI_2, LN_2};
use std::time::{Duration, Instant};

use kerrloss::sparse::lowering;
use kerrloss::*;
use kerrloss_cli::{crescent_state, PANELS};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

const SEED: u64 = 0x6b65_7272;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn cut(n: usize) -> FockCutoff {
    FockCutoff::new(n).unwrap()
}

fn product(a1: CoherentAmplitude, a2: CoherentAmplitude, c: FockCutoff) -> TwoModeDensity {
    tensor_product(&coherent_density(a1, c).unwrap(), &coherent_density(a2, c).unwrap()).unwrap()
}

fn amplitude(rng: &mut StdRng, max: f64) -> CoherentAmplitude {
    let r = max * rng.gen::<f64>().sqrt();
    let th = rng.gen_range(0.0..std::f64::consts::TAU);
    CoherentAmplitude(C64::from_polar(r, th))
}

struct Draw {
    a1: CoherentAmplitude,
    a2: CoherentAmplitude,
    t: f64,
    p: KerrLossParams,
}

fn uncorrelated_draws(n: usize, seed: u64, dephasing: bool) -> Vec<Draw> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let (a1, a2) = (amplitude(&mut rng, 1.0), amplitude(&mut rng, 1.0));
            let chi = rng.gen_range(0.0..2.0);
            let mut p = KerrLossParams::cross_kerr(chi).with_loss(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            if dephasing {
                p = p.with_dephasing(rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
            }
            Draw { a1, a2, t: rng.gen_range(0.0..1.0), p }
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let c = cut(8);
    let draws = uncorrelated_draws(50, SEED, true);
    let diffs: Vec<f64> = draws
        .par_iter()
        .map(|d| {
            let exact = evolve_exact(d.a1, d.a2, d.t, &d.p, c).unwrap();
            let oracle = coherent_pair_reference(d.a1, d.a2, d.t, &d.p, c, oracle::DEFAULT_PADDING, 1e-10).unwrap();
            exact.max_abs_diff(&oracle)
        })
        .collect();
    let worst = diffs.iter().cloned().fold(0.0, f64::max);
    outcome(worst <= 1e-6, format!("oracle equivalence, 50 sets, max |diff| = {worst:.2e} (<= 1e-6)"))
}

fn criterion_2() -> Outcome {
    let draws = uncorrelated_draws(20, SEED + 2, false);
    let diffs: Vec<f64> = draws
        .par_iter()
        .map(|d| {
            let c = FockCutoff::recommended(d.a1.abs().max(d.a2.abs()));
            let closed = purity_exact(d.a1, d.a2, d.t, &d.p).unwrap();
            (closed - purity(&evolve_exact(d.a1, d.a2, d.t, &d.p, c).unwrap())).abs()
        })
        .collect();
    let worst = diffs.iter().cloned().fold(0.0, f64::max);
    let initial = draws
        .iter()
        .map(|d| (purity_exact(d.a1, d.a2, 0.0, &d.p).unwrap() - 1.0).abs())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-6 && initial <= 1e-9,
        format!("purity consistency, 20 sets, max |diff| = {worst:.2e} (<= 1e-6), |P(0) - 1| = {initial:.1e} (<= 1e-9)"),
    )
}

fn criterion_3() -> Outcome {
    let chi = 1.0;
    let a = CoherentAmplitude::new(1.2, 0.0);
    let c = cut(14);
    let gen = build_cross_kerr_generator(&KerrLossParams::symmetric_kerr(chi), c).unwrap();
    let rho = integrate(&product(a, a, c), &gen, FRAC_PI_2 / chi, 1e-10).unwrap();
    let fid = lossless_cat_reference(a, a).fidelity(&rho).unwrap();
    outcome(fid >= 1.0 - 1e-6, format!("lossless cat, fidelity = 1 - {:.2e} (>= 1 - 1e-6)", 1.0 - fid))
}

fn criterion_4() -> Outcome {
    let (chi, t, x) = (1.0, 0.1, 0.0);
    let a = CoherentAmplitude::new(2.0, 0.0);
    let c = cut(16);
    let grid = PhaseSpaceGrid::square(5.0, 201).unwrap();
    let lossless = crescent_state(a, a, &KerrLossParams::cross_kerr(chi), t, x, c).unwrap().state.normalized();
    let lossy_p = KerrLossParams::cross_kerr(chi).with_loss(LN_2 / t, 0.0);
    let lossy = crescent_state(a, a, &lossy_p, t, x, c).unwrap().state.normalized();
    let w_gen = min_wigner(&lossy, grid).unwrap().value;
    let bs_min = bs_half_loss_wigner(&lossless, grid).min().0;
    let w_clean = min_wigner(&lossless, grid).unwrap().value;
    outcome(
        w_gen < -1e-4 && bs_min >= -1e-12,
        format!(
            "generation vs propagation loss, min W: lossless {w_clean:.4}, generation {w_gen:.4e} (< -1e-4), propagation {bs_min:.2e} (>= -1e-12)"
        ),
    )
}

fn criterion_5() -> Outcome {
    let chi = 1.0;
    let (a1, a2) = (CoherentAmplitude::new(4.0, 0.0), CoherentAmplitude::new(0.0, 0.0));
    let c = FockCutoff::recommended(4.0);
    let grid = PhaseSpaceGrid::square(7.0, 141).unwrap();
    let mins: Vec<(&str, f64)> = PANELS
        .par_iter()
        .map(|panel| {
            let cat = conditioned_cat(a1, a2, FRAC_PI_2 / chi, &panel.params(chi), c).unwrap();
            (panel.label, min_wigner(&cat.state, grid).unwrap().value)
        })
        .collect();
    let strong = -0.1 * std::f64::consts::FRAC_2_PI;
    let ok = mins.iter().all(|&(label, w)| match label {
        "a" => w < strong,
        "b" => w < 0.0,
        "c" | "e" => w >= -1e-3,
        _ => w < -1e-3,
    });
    let list: Vec<String> = mins.iter().map(|(l, w)| format!("{l} {w:.4e}")).collect();
    outcome(ok, format!("loss panels, min W: {}", list.join(", ")))
}

/// Eigensolved negativity of `(1 − w)|00⟩⟨00| + w|ψ₋⟩⟨ψ₋|` with
/// `|ψ₋⟩ ∝ g₂|10⟩ − g₁|01⟩` and `w = g₂²/(g₁² + g₂²)`.
fn dark_mixture_negativity(g1: f64, g2: f64) -> f64 {
    let c = cut(1);
    let g = g1.hypot(g2);
    let mut psi = DVector::<C64>::zeros(4);
    psi[2] = C64::new(g2 / g, 0.0);
    psi[1] = C64::new(-g1 / g, 0.0);
    let w = (g2 / g).powi(2);
    let dark = TwoModeDensity::from_pure(&psi, c).unwrap();
    let rho = dark.matrix().scale(w) + TwoModeDensity::vacuum(c).matrix().scale(1.0 - w);
    negativity(&TwoModeDensity::new(rho, c, true).unwrap()).unwrap()
}

fn criterion_6() -> Outcome {
    let (dw, chic) = (0.3, 0.1);
    let times: Vec<f64> = (0..=600).map(|i| 0.1 * i as f64).collect();
    let want = dark_mixture_negativity(1.0, 1.0);
    let traces: Vec<TimeSeries> =
        [0.25, 1.0, 2.0].iter().map(|&gb| negativity_trace(1.0, 1.0, dw, chic, gb, &times).unwrap()).collect();
    let start = traces.iter().map(|s| s.values[0].abs()).fold(0.0, f64::max);
    let lasts: Vec<f64> = traces.iter().map(|s| s.last().unwrap().1).collect();
    let off = lasts.iter().map(|v| (v - want).abs()).fold(0.0, f64::max);
    let spread = lasts.iter().map(|v| (v - lasts[0]).abs()).fold(0.0, f64::max);
    let unequal = negativity_trace(2.0, 1.0, dw, chic, 1.0, &times).unwrap().last().unwrap().1;

    let c = cut(1);
    let rho0 = TwoModeDensity::fock(1, 0, c);
    let mut oracle_diff = 0.0f64;
    for (g1, g2, gb) in [(1.0, 1.0, 0.25), (1.0, 1.0, 2.0), (2.0, 1.0, 1.0)] {
        let gen = build_collective_generator(g1, g2, dw, chic, gb, 0.0, c).unwrap();
        for t in [0.5, 2.0, 7.0] {
            let want = integrate(&rho0, &gen, t, 1e-12).unwrap();
            let got = beamsplit_decoherence_evolve(g1, g2, dw, chic, gb, t, &rho0).unwrap();
            oracle_diff = oracle_diff.max(got.max_abs_diff(&want));
        }
    }
    let ok = start == 0.0 && off <= 1e-6 && spread <= 1e-6 && unequal < lasts[0] && oracle_diff <= 1e-8;
    outcome(
        ok,
        format!(
            "beam splitting by decoherence, N(0) = {start:.1e}, asymptote {:.8} vs {want:.8} (spread {spread:.1e}), g1 = 2g2 gives {unequal:.6}, oracle diff {oracle_diff:.1e}",
            lasts[0]
        ),
    )
}

fn criterion_7() -> Outcome {
    let c = cut(7);
    let mut rng = StdRng::seed_from_u64(SEED + 7);
    let cases: Vec<(KerrLossParams, TwoModeDensity, f64)> = (0..10)
        .map(|_| {
            let (g1, g2) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
            let g12 = rng.gen_range(-1.0..1.0) * f64::min(g1, g2);
            let p = KerrLossParams::symmetric_kerr(rng.gen_range(0.0..2.0)).with_loss(g1, g2).with_cross_loss(g12);
            let rho0 = product(amplitude(&mut rng, 0.6), amplitude(&mut rng, 0.6), c).project_total_number(7);
            (p, rho0, rng.gen_range(0.0..1.0))
        })
        .collect();
    let worst = cases
        .par_iter()
        .map(|(p, rho0, t)| {
            let direct = integrate(rho0, &build_cross_kerr_generator(p, c).unwrap(), *t, 1e-10).unwrap();
            direct.max_abs_diff(&evolve_rotated_frame(rho0, p, *t, 1e-10).unwrap())
        })
        .reduce(|| 0.0, f64::max);

    let p = KerrLossParams::symmetric_kerr(0.0).with_loss(0.8, 0.8).with_cross_loss(0.8);
    let frame = rotation_frame(&p, 0.0.into(), 0.0.into()).unwrap();
    let c = cut(8);
    let rho0 = product(CoherentAmplitude::new(0.7, 0.0), CoherentAmplitude::new(0.0, 0.5), c).project_total_number(8);
    let (a1, a2) = (lowering(ModeIndex::First, c).to_dense(), lowering(ModeIndex::Second, c).to_dense());
    let (s, co) = frame.phi.sin_cos();
    let b1 = a1.scale(co) - a2.scale(s);
    let nb1: DMatrix<C64> = b1.adjoint() * &b1;
    let rho = integrate(&rho0, &build_cross_kerr_generator(&p, c).unwrap(), 2.0, 1e-11).unwrap();
    let drift = ((&nb1 * rho.matrix()).trace() - (&nb1 * rho0.matrix()).trace()).norm();
    outcome(
        worst <= 1e-7 && drift <= 1e-8,
        format!("correlated-loss rotation, 10 sets, max |diff| = {worst:.2e} (<= 1e-7), <n_b1> drift = {drift:.1e} (<= 1e-8)"),
    )
}

fn criterion_8() -> Outcome {
    let a = CoherentAmplitude::new(0.8, 0.0);
    let p = KerrLossParams::cross_kerr(0.05).with_loss(2.0, 2.0);
    let pur = purity_exact(a, a, 3.0, &p).unwrap();
    outcome(pur >= 0.99, format!("long-time purity = {pur:.6} (>= 0.99)"))
}

fn criterion_9() -> Outcome {
    let (d1, t) = (0.7, 1.3);
    let (a1, a2) = (CoherentAmplitude::new(0.9, 0.3), CoherentAmplitude(C64::new(0.5, -0.2)));
    let c = cut(8);
    let p = KerrLossParams::cross_kerr(0.0).with_dephasing(d1, 0.0);
    let rho0 = product(a1, a2, c);
    let exact = evolve_exact(a1, a2, t, &p, c).unwrap();
    let oracle = integrate(&rho0, &build_cross_kerr_generator(&p, c).unwrap(), t, 1e-12).unwrap();
    let d = c.dim();
    let (mut worst_exact, mut worst_oracle) = (0.0f64, 0.0f64);
    for k in 0..d {
        for l in 0..d {
            let law = (-0.5 * d1 * ((k as f64 - l as f64).powi(2)) * t).exp();
            for m in 0..d {
                for n in 0..d {
                    let r0 = rho0.get(k, l, m, n);
                    if r0.norm() > 1e-12 {
                        worst_exact = worst_exact.max((exact.get(k, l, m, n) / r0 - law).norm());
                    }
                    if r0.norm() > 1e-2 {
                        worst_oracle = worst_oracle.max((oracle.get(k, l, m, n) / r0 - law).norm());
                    }
                }
            }
        }
    }
    outcome(
        worst_exact <= 1e-9 && worst_oracle <= 1e-9,
        format!("dephasing law, max ratio error: closed form {worst_exact:.1e}, integrator {worst_oracle:.1e} (<= 1e-9)"),
    )
}

fn main() {
    let criteria: [(u32, fn() -> Outcome, u64); 9] = [
        (1, criterion_1, 120),
        (2, criterion_2, 60),
        (3, criterion_3, 30),
        (4, criterion_4, 120),
        (5, criterion_5, 300),
        (6, criterion_6, 60),
        (7, criterion_7, 60),
        (8, criterion_8, 10),
        (9, criterion_9, 10),
    ];
    let mut failed = 0;
    for (n, run, budget) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let in_time = took <= Duration::from_secs(budget);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {n}: {} [{:.2} s of {budget} s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
