//! Correlated reservoirs: mode rotation, cat-state generation and its
//! references, the detector-conditioned state and the single-excitation
//! beam-splitting-by-decoherence dynamics.
//!
//! The rotated modes are `b₁ = a₁cos φ − a₂sin φ` and
//! `b₂ = a₁sin φ + a₂cos φ`, with `tan 2φ = 2γ₁₂/(γ₂ − γ₁)`, which turn the
//! correlated loss into independent loss of `b₁` and `b₂` at rates `γ̄₁`,
//! `γ̄₂`.

use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64 as C64;

use crate::analytic::{f_function, KerrLossParams, ValidityReport};
use crate::error::{KerrError, Result};
use crate::fock::{coherent_vector, CoherentAmplitude, DensityOperator, FockCutoff, SingleModeDensity, TwoModeDensity};
use crate::observables::{negativity, TimeSeries};
use crate::oracle::{build_cross_kerr_generator, integrate};

/// Population above the total-number cutoff that a frame rotation may drop.
pub const ROTATION_TAIL_TOL: f64 = 1e-10;

/// Population outside `{|00⟩, |10⟩, |01⟩}` tolerated by
/// [`beamsplit_decoherence_evolve`].
pub const SUBSPACE_TOL: f64 = 1e-12;

/// Rotation angle, diagonal rates and rotated amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationFrame {
    pub phi: f64,
    pub gamma_bar_1: f64,
    pub gamma_bar_2: f64,
    pub alpha_bar_1: C64,
    pub alpha_bar_2: C64,
}

impl RotationFrame {
    /// Frame for the loss rates of `p`; dephasing must vanish.
    pub fn new(p: &KerrLossParams, alpha1: CoherentAmplitude, alpha2: CoherentAmplitude) -> Result<Self> {
        p.validate()?;
        if p.d1 != 0.0 || p.d2 != 0.0 || p.d12 != 0.0 {
            return Err(KerrError::DephasingUnsupported);
        }
        let mut two_phi = (2.0 * p.gamma12).atan2(p.gamma2 - p.gamma1);
        if two_phi > std::f64::consts::FRAC_PI_2 {
            two_phi -= std::f64::consts::PI;
        } else if two_phi <= -std::f64::consts::FRAC_PI_2 {
            two_phi += std::f64::consts::PI;
        }
        let phi = 0.5 * two_phi;
        let (s, c) = phi.sin_cos();
        let s2 = two_phi.sin();
        let (a1, a2) = (alpha1.value(), alpha2.value());
        Ok(Self {
            phi,
            gamma_bar_1: (p.gamma1 * c * c + p.gamma2 * s * s - p.gamma12 * s2).max(0.0),
            gamma_bar_2: (p.gamma2 * c * c + p.gamma1 * s * s + p.gamma12 * s2).max(0.0),
            alpha_bar_1: a1 * c - a2 * s,
            alpha_bar_2: a2 * c + a1 * s,
        })
    }

    /// Uncorrelated parameters of the rotated problem, keeping the Kerr
    /// matrix of `p`.
    pub fn rotated_params(&self, p: &KerrLossParams) -> KerrLossParams {
        KerrLossParams {
            gamma1: self.gamma_bar_1,
            gamma2: self.gamma_bar_2,
            gamma12: 0.0,
            ..*p
        }
    }
}

/// Alias for [`RotationFrame::new`].
pub fn rotation_frame(p: &KerrLossParams, alpha1: CoherentAmplitude, alpha2: CoherentAmplitude) -> Result<RotationFrame> {
    RotationFrame::new(p, alpha1, alpha2)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Unitary taking a-mode Fock amplitudes to b-mode Fock amplitudes on the
/// states with `n₁ + n₂ ≤ n_max`; rows and columns above are zero.
pub fn rotation_matrix(phi: f64, cutoff: FockCutoff) -> DMatrix<C64> {
    let d = cutoff.dim();
    let n_max = cutoff.n_max();
    let (s, c) = phi.sin_cos();
    let mut u = DMatrix::zeros(d * d, d * d);
    // a₁† = c b₁† + s b₂†, a₂† = −s b₁† + c b₂†
    for n in 0..=n_max {
        for n1 in 0..=n {
            let n2 = n - n1;
            for j in 0..=n {
                let mut coeff = 0.0;
                for p in j.saturating_sub(n2)..=j.min(n1) {
                    let q = j - p;
                    coeff += binomial(n1, p)
                        * c.powi(p as i32)
                        * s.powi((n1 - p) as i32)
                        * binomial(n2, q)
                        * (-s).powi(q as i32)
                        * c.powi((n2 - q) as i32);
                }
                let norm = (0.5 * (ln_factorial(j) + ln_factorial(n - j) - ln_factorial(n1) - ln_factorial(n2))).exp();
                u[(j * d + (n - j), n1 * d + n2)] = C64::new(coeff * norm, 0.0);
            }
        }
    }
    u
}

fn rotate(rho: &TwoModeDensity, phi: f64) -> Result<TwoModeDensity> {
    let cutoff = rho.cutoff();
    let above = rho.population_above_total(cutoff.n_max());
    if above > ROTATION_TAIL_TOL {
        return Err(KerrError::TotalNumberOverflow(above));
    }
    let u = rotation_matrix(phi, cutoff);
    let m = &u * rho.matrix() * u.adjoint();
    TwoModeDensity::new(m, cutoff, rho.is_normalized())
}

/// Expresses `ρ` in the Fock basis of the rotated modes `b₁, b₂`.
///
/// Exact on states supported by `n₁ + n₂ ≤ n_max`; fails with
/// `TotalNumberOverflow` if more than [`ROTATION_TAIL_TOL`] population
/// lies above. Use [`TwoModeDensity::project_total_number`] first when
/// that tail is known to be negligible.
pub fn to_rotated_frame(rho: &TwoModeDensity, phi: f64) -> Result<TwoModeDensity> {
    rotate(rho, phi)
}

/// Inverse of [`to_rotated_frame`].
pub fn from_rotated_frame(rho: &TwoModeDensity, phi: f64) -> Result<TwoModeDensity> {
    rotate(rho, -phi)
}

/// Integrates the correlated-loss problem in the rotated frame: rotate,
/// evolve with independent losses `γ̄₁, γ̄₂`, rotate back.
///
/// The Kerr matrix must be a multiple of `(n₁ + n₂)²` (or zero), the only
/// coupling left invariant by the rotation. Covers the full region
/// `γ₁γ₂ ≥ γ₁₂²`.
pub fn evolve_rotated_frame(rho0: &TwoModeDensity, p: &KerrLossParams, t: f64, tol: f64) -> Result<TwoModeDensity> {
    let invariant = p.symmetric_rate().is_some() || p.kerr_matrix().iter().flatten().all(|&v| v == 0.0);
    if !invariant {
        return Err(KerrError::UnsupportedHamiltonian(
            "the rotated frame needs a Kerr matrix proportional to (n1 + n2)^2".into(),
        ));
    }
    let frame = RotationFrame::new(p, C64::new(0.0, 0.0).into(), C64::new(0.0, 0.0).into())?;
    let gen = build_cross_kerr_generator(&frame.rotated_params(p), rho0.cutoff())?;
    let rotated = to_rotated_frame(rho0, frame.phi)?;
    let evolved = integrate(&rotated, &gen, t, tol)?;
    // loss only lowers n₁ + n₂, so the support stays below the cutoff
    from_rotated_frame(&evolved.project_total_number(rho0.cutoff().n_max()), frame.phi)
}

/// Superposition `Σ w_j |β_j⟩|γ_j⟩` of two-mode coherent products.
#[derive(Clone, Debug, PartialEq)]
pub struct CatReference {
    /// `(weight, mode-1 amplitude, mode-2 amplitude)`; weights are as
    /// written, before overlap normalization.
    pub components: Vec<(C64, CoherentAmplitude, CoherentAmplitude)>,
    pub tag: String,
}

fn coherent_overlap(a: C64, b: C64) -> C64 {
    (-(0.5 * a.norm_sqr() + 0.5 * b.norm_sqr()) + a.conj() * b).exp()
}

impl CatReference {
    /// Squared norm of the written superposition, including coherent-state
    /// overlaps.
    pub fn norm_sqr(&self) -> f64 {
        let mut s = C64::new(0.0, 0.0);
        for (wi, ai, bi) in &self.components {
            for (wj, aj, bj) in &self.components {
                s += wi.conj() * wj * coherent_overlap(ai.value(), aj.value()) * coherent_overlap(bi.value(), bj.value());
            }
        }
        s.re
    }

    /// Weights scaled so the untruncated state has unit norm.
    pub fn normalized_weights(&self) -> Vec<C64> {
        let n = self.norm_sqr().sqrt();
        self.components.iter().map(|(w, _, _)| w / n).collect()
    }

    /// Unit vector on the truncated space, indexed `k·d + m`.
    pub fn state_vector(&self, cutoff: FockCutoff) -> Result<DVector<C64>> {
        let d = cutoff.dim();
        let mut psi = DVector::zeros(d * d);
        for ((_, a, b), w) in self.components.iter().zip(self.normalized_weights()) {
            cutoff.check(*a)?;
            cutoff.check(*b)?;
            let (va, vb) = (coherent_vector(a.value(), cutoff), coherent_vector(b.value(), cutoff));
            for k in 0..d {
                for m in 0..d {
                    psi[k * d + m] += w * va[k] * vb[m];
                }
            }
        }
        let n = psi.norm();
        psi.unscale_mut(n);
        Ok(psi)
    }

    pub fn render(&self, cutoff: FockCutoff) -> Result<TwoModeDensity> {
        TwoModeDensity::from_pure(&self.state_vector(cutoff)?, cutoff)
    }

    /// `⟨ψ|ρ|ψ⟩` on the cutoff of `rho`.
    pub fn fidelity(&self, rho: &TwoModeDensity) -> Result<f64> {
        Ok(rho.expectation_in(&self.state_vector(rho.cutoff())?))
    }
}

/// `(i|α₁⟩|α₂⟩ + |−α₁⟩|−α₂⟩)/√2`, the lossless state at `χt = π/2`.
pub fn lossless_cat_reference(alpha1: CoherentAmplitude, alpha2: CoherentAmplitude) -> CatReference {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let neg = |a: CoherentAmplitude| CoherentAmplitude(-a.value());
    CatReference {
        components: vec![(C64::new(0.0, h), alpha1, alpha2), (C64::new(h, 0.0), neg(alpha1), neg(alpha2))],
        tag: "lossless cat".into(),
    }
}

/// Cat left by completely correlated loss once `b₂` has decayed: amplitudes
/// `α̃₁ = α₁cos²φ − α₂cos φ sin φ`, `α̃₂ = α₂sin²φ − α₁cos φ sin φ`.
///
/// The report holds `2χ|ᾱ₁|² ≪ γ̄₂` and `γ̄₂t ≫ 1` when `t` is given.
pub fn correlated_cat_asymptotic(
    alpha1: CoherentAmplitude,
    alpha2: CoherentAmplitude,
    p: &KerrLossParams,
    t: Option<f64>,
) -> Result<(CatReference, ValidityReport)> {
    let frame = RotationFrame::new(p, alpha1, alpha2)?;
    let defect = p.gamma1 * p.gamma2 - p.gamma12 * p.gamma12;
    if defect.abs() > 1e-12 * p.gamma1 * p.gamma2 || p.gamma1 * p.gamma2 == 0.0 {
        return Err(KerrError::NotFullyCorrelated(defect));
    }
    let (s, c) = frame.phi.sin_cos();
    let (a1, a2) = (alpha1.value(), alpha2.value());
    let t1 = CoherentAmplitude(a1 * c * c - a2 * c * s);
    let t2 = CoherentAmplitude(a2 * s * s - a1 * c * s);
    let mut cat = lossless_cat_reference(t1, t2);
    cat.tag = "correlated-loss asymptotic cat".into();

    let chi = p.symmetric_rate().unwrap_or(p.chi).abs();
    let mut report = ValidityReport::default();
    report.much_less("2 chi |abar1|^2 << gamma_bar_2", 2.0 * chi * frame.alpha_bar_1.norm_sqr(), frame.gamma_bar_2);
    if let Some(t) = t {
        report.much_less("1 << gamma_bar_2 t", 1.0, frame.gamma_bar_2 * t);
    }
    Ok((cat, report))
}

/// State of `b₁` after no signal from `b₂`, and the probability of that
/// outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionedCat {
    pub state: SingleModeDensity,
    pub success_probability: f64,
    pub frame: RotationFrame,
}

/// Conditioned state of the rotated mode `b₁` when `b₂` is found in vacuum
/// at time `t`, for the Kerr coupling `χ(n₁ + n₂)²` and loss only.
///
/// `ρ₁[k,l] ∝ ᾱ₁^k ᾱ₁*^l/√(k!l!) exp{iχt(k²−l²) − γ̄₁t(k+l)/2 + f_kl}` where
/// `f_kl` sums the decay functions of both rotated rates with the phase
/// index `2χ(k − l)` that the Kerr coupling imprints per lost photon.
pub fn conditioned_cat(
    alpha1: CoherentAmplitude,
    alpha2: CoherentAmplitude,
    t: f64,
    p: &KerrLossParams,
    cutoff: FockCutoff,
) -> Result<ConditionedCat> {
    let chi = p.symmetric_rate().ok_or_else(|| {
        KerrError::UnsupportedHamiltonian("the conditioned cat needs a Kerr matrix proportional to (n1 + n2)^2".into())
    })?;
    if !(t >= 0.0) {
        return Err(KerrError::InvalidParameters(format!("time must be non-negative, got {t}")));
    }
    let frame = RotationFrame::new(p, alpha1, alpha2)?;
    let (ab1, ab2) = (frame.alpha_bar_1, frame.alpha_bar_2);
    cutoff.check(CoherentAmplitude(ab1))?;
    let d = cutoff.dim();
    let c = coherent_vector(ab1, cutoff);
    let n = cutoff.n_max() as i64;
    let f: Vec<C64> = (-n..=n)
        .map(|i| {
            f_function(frame.gamma_bar_1, i, 2.0 * chi, ab1.norm_sqr(), t)
                + f_function(frame.gamma_bar_2, i, 2.0 * chi, ab2.norm_sqr(), t)
        })
        .collect();
    let vac2 = (-ab2.norm_sqr()).exp();
    let m = DMatrix::from_fn(d, d, |k, l| {
        let (ki, li) = (k as i64, l as i64);
        let e = C64::new(
            -0.5 * frame.gamma_bar_1 * t * (k + l) as f64,
            chi * t * (ki * ki - li * li) as f64,
        ) + f[(ki - li + n) as usize];
        c[k] * c[l].conj() * e.exp() * vac2
    });
    let raw = SingleModeDensity::new(m, cutoff)?;
    let success_probability = raw.trace().re;
    Ok(ConditionedCat {
        state: raw.normalized(),
        success_probability,
        frame,
    })
}

/// The basis `ψ₊ = (g₁|10⟩ + g₂|01⟩)/G`, `ψ₋ = (g₂|10⟩ − g₁|01⟩)/G`,
/// `v = |00⟩` as columns over the two-mode space.
pub fn single_excitation_basis(g1: f64, g2: f64, cutoff: FockCutoff) -> Result<DMatrix<C64>> {
    let g = g1.hypot(g2);
    if g == 0.0 {
        return Err(KerrError::ZeroCoupling);
    }
    let d = cutoff.dim();
    let (i10, i01) = (d, 1);
    let mut v = DMatrix::zeros(d * d, 3);
    v[(i10, 0)] = C64::new(g1 / g, 0.0);
    v[(i01, 0)] = C64::new(g2 / g, 0.0);
    v[(i10, 1)] = C64::new(g2 / g, 0.0);
    v[(i01, 1)] = C64::new(-g1 / g, 0.0);
    v[(0, 2)] = C64::new(1.0, 0.0);
    Ok(v)
}

/// Closed-form evolution of a state confined to `{|00⟩, |10⟩, |01⟩}` under
/// collective loss at rate `γ̄` and the Hamiltonian `δw C†C + χ_c (C†C)²`.
///
/// Only `ψ₊` couples to the reservoir, so `ρ₋₋` and `ρ₋ᵥ` are constant,
/// `ρ₊₊` decays as `e^{−2γ̄t}` into `|00⟩`, and `ρ₊₋`, `ρ₊ᵥ` decay as
/// `e^{−[γ̄ + i(δw + χ_c)]t}`.
pub fn beamsplit_decoherence_evolve(
    g1: f64,
    g2: f64,
    delta_w: f64,
    chi_c: f64,
    gamma_bar: f64,
    t: f64,
    rho0: &TwoModeDensity,
) -> Result<TwoModeDensity> {
    if !(gamma_bar >= 0.0 && t >= 0.0) {
        return Err(KerrError::InvalidParameters(format!(
            "gamma_bar and t must be non-negative (gamma_bar = {gamma_bar}, t = {t})"
        )));
    }
    let cutoff = rho0.cutoff();
    let d = cutoff.dim();
    let outside: f64 = (0..d * d)
        .filter(|&i| i != 0 && i != 1 && i != d)
        .map(|i| rho0.matrix()[(i, i)].re.abs())
        .sum();
    if outside > SUBSPACE_TOL {
        return Err(KerrError::SubspaceViolation(outside));
    }
    let v = single_excitation_basis(g1, g2, cutoff)?;
    let b0 = v.adjoint() * rho0.matrix() * &v;
    let b0 = Matrix3::from_fn(|r, c| b0[(r, c)]);

    let damp = (-2.0 * gamma_bar * t).exp();
    let coh = (C64::new(-gamma_bar, -(delta_w + chi_c)) * t).exp();
    let mut b = b0;
    b[(0, 0)] = b0[(0, 0)] * damp;
    b[(2, 2)] = b0[(2, 2)] + b0[(0, 0)] * (1.0 - damp);
    for j in [1, 2] {
        b[(0, j)] = b0[(0, j)] * coh;
        b[(j, 0)] = b0[(j, 0)] * coh.conj();
    }
    let bd = DMatrix::from_fn(3, 3, |r, c| b[(r, c)]);
    TwoModeDensity::new(&v * bd * v.adjoint(), cutoff, rho0.is_normalized())
}

/// Negativity of the state grown from `|10⟩` by collective loss, at each
/// requested time.
pub fn negativity_trace(
    g1: f64,
    g2: f64,
    delta_w: f64,
    chi_c: f64,
    gamma_bar: f64,
    t_samples: &[f64],
) -> Result<TimeSeries> {
    if t_samples.is_empty() {
        return Err(KerrError::InvalidParameters("no time samples".into()));
    }
    if t_samples.windows(2).any(|w| w[1] < w[0]) {
        return Err(KerrError::InvalidParameters("time samples must be ascending".into()));
    }
    let cutoff = FockCutoff::new(1)?;
    let rho0 = TwoModeDensity::fock(1, 0, cutoff);
    let mut series = TimeSeries::default();
    for &t in t_samples {
        let rho = beamsplit_decoherence_evolve(g1, g2, delta_w, chi_c, gamma_bar, t, &rho0)?;
        series.t.push(t);
        series.values.push(negativity(&rho)?);
    }
    Ok(series)
}
