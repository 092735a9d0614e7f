//! Brute-force Markovian master-equation integration on the truncated
//! two-mode space.
//!
//! The generator is `dρ/dt = −i[H, ρ] + Σ_j (r_j/2) L(J_j)ρ` with
//! `L(b)ρ = 2bρb† − b†bρ − ρb†b`. It is applied to the dense density matrix
//! through sparse operators and integrated with an adaptive Dormand–Prince
//! 5(4) scheme.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::analytic::KerrLossParams;
use crate::error::{KerrError, Result};
use crate::fock::{coherent_density, tensor_product, CoherentAmplitude, DensityOperator, FockCutoff, ModeIndex, TwoModeDensity};
use crate::sparse::{lowering, number, SparseOp};

/// Default local error tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default steady-state threshold on `max |dρ/dt|`.
pub const DEFAULT_SETTLE_TOL: f64 = 1e-10;

const HERMITIAN_TOL: f64 = 1e-12;
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// One dissipative channel: `(rate/2)·L(operator)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpTerm {
    pub rate: f64,
    pub operator: SparseOp,
}

impl JumpTerm {
    pub fn new(rate: f64, operator: SparseOp) -> Self {
        Self { rate, operator }
    }
}

/// Hamiltonian plus weighted jump operators on a two-mode cutoff.
#[derive(Clone, Debug)]
pub struct LindbladGenerator {
    hamiltonian: SparseOp,
    jumps: Vec<JumpTerm>,
    cutoff: FockCutoff,
    // −i(H − (i/2) Σ r J†J)
    drift: SparseOp,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: SparseOp, jumps: Vec<JumpTerm>, cutoff: FockCutoff) -> Result<Self> {
        let dim = cutoff.pair_dim();
        if hamiltonian.dim() != dim {
            return Err(KerrError::DimensionMismatch(format!(
                "Hamiltonian has dimension {}, cutoff needs {dim}",
                hamiltonian.dim()
            )));
        }
        let defect = hamiltonian.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(KerrError::NotHermitian(defect));
        }
        let mut drift = hamiltonian.scale(C64::new(0.0, -1.0));
        for (i, j) in jumps.iter().enumerate() {
            if j.operator.dim() != dim {
                return Err(KerrError::DimensionMismatch(format!(
                    "jump {i} has dimension {}, cutoff needs {dim}",
                    j.operator.dim()
                )));
            }
            if !(j.rate >= 0.0) || !j.rate.is_finite() {
                return Err(KerrError::InvalidParameters(format!("jump {i} has rate {}", j.rate)));
            }
            let jdj = j.operator.adjoint().mul(&j.operator);
            drift = drift.add(&jdj.scale(C64::new(-0.5 * j.rate, 0.0)));
        }
        Ok(Self {
            hamiltonian,
            jumps,
            cutoff,
            drift,
        })
    }

    pub fn hamiltonian(&self) -> &SparseOp {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[JumpTerm] {
        &self.jumps
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    /// `dρ/dt` for a dense matrix.
    pub fn apply(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let n = rho.nrows();
        let mut out = DMatrix::zeros(n, n);
        self.apply_into(rho, &mut out);
        out
    }

    fn apply_into(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        let n = rho.nrows();
        out.fill(C64::new(0.0, 0.0));
        self.drift.left_mul_acc(rho, ONE, out);
        self.drift.right_mul_adjoint_acc(rho, ONE, out);
        let mut tmp = DMatrix::zeros(n, n);
        for j in &self.jumps {
            tmp.fill(C64::new(0.0, 0.0));
            j.operator.left_mul_acc(rho, ONE, &mut tmp);
            j.operator.right_mul_adjoint_acc(&tmp, C64::new(j.rate, 0.0), out);
        }
    }
}

fn lin(terms: &[(f64, &SparseOp)]) -> SparseOp {
    let dim = terms[0].1.dim();
    terms
        .iter()
        .fold(SparseOp::zeros(dim), |acc, (c, op)| acc.add(&op.scale(C64::new(*c, 0.0))))
}

/// Generator of the two-mode model with possibly correlated loss and
/// dephasing.
///
/// Correlated channels use the decomposition
/// `(γ₁−|γ₁₂|)L(a₁) + (γ₂−|γ₁₂|)L(a₂) + |γ₁₂|L(a₁ ± a₂)` (and likewise for
/// dephasing with `n₁ ± n₂`), the sign following that of the cross rate.
/// The Hamiltonian is `H = −Σ χ_kl n_k n_l`.
pub fn build_cross_kerr_generator(p: &KerrLossParams, cutoff: FockCutoff) -> Result<LindbladGenerator> {
    p.validate()?;
    for (name, a, b, ab) in [("gamma", p.gamma1, p.gamma2, p.gamma12), ("d", p.d1, p.d2, p.d12)] {
        if ab.abs() > a.min(b) {
            return Err(KerrError::RateDecomposition(format!(
                "|{name}12| = {} exceeds min({name}1, {name}2) = {}",
                ab.abs(),
                a.min(b)
            )));
        }
    }
    let d = cutoff.dim();
    let chi = p.kerr_matrix();
    let hamiltonian = SparseOp::diagonal((0..d * d).map(|i| {
        let (k, m) = ((i / d) as f64, (i % d) as f64);
        C64::new(-(chi[0][0] * k * k + (chi[0][1] + chi[1][0]) * k * m + chi[1][1] * m * m), 0.0)
    }));

    let (a1, a2) = (lowering(ModeIndex::First, cutoff), lowering(ModeIndex::Second, cutoff));
    let (n1, n2) = (number(ModeIndex::First, cutoff), number(ModeIndex::Second, cutoff));
    let mut jumps = Vec::new();
    let mut channel = |r1: f64, r2: f64, r12: f64, o1: &SparseOp, o2: &SparseOp| {
        let c = r12.abs();
        for (rate, op) in [(r1 - c, o1.clone()), (r2 - c, o2.clone()), (c, lin(&[(1.0, o1), (r12.signum(), o2)]))] {
            if rate > 0.0 {
                jumps.push(JumpTerm::new(rate, op));
            }
        }
    };
    channel(p.gamma1, p.gamma2, p.gamma12, &a1, &a2);
    channel(p.d1, p.d2, p.d12, &n1, &n2);
    LindbladGenerator::new(hamiltonian, jumps, cutoff)
}

/// Collective mode `C = (g₁a₁ + g₂a₂)/G` with `G = √(g₁² + g₂²)`.
pub fn collective_mode(g1: f64, g2: f64, cutoff: FockCutoff) -> Result<SparseOp> {
    let g = g1.hypot(g2);
    if g == 0.0 {
        return Err(KerrError::ZeroCoupling);
    }
    Ok(lin(&[
        (g1 / g, &lowering(ModeIndex::First, cutoff)),
        (g2 / g, &lowering(ModeIndex::Second, cutoff)),
    ]))
}

/// Generator `−i[δw C†C + χ_c (C†C)², ρ] + γ̄L(C)ρ + d̄L(C†C)ρ`.
pub fn build_collective_generator(
    g1: f64,
    g2: f64,
    delta_w: f64,
    chi_c: f64,
    gamma_bar: f64,
    d_bar: f64,
    cutoff: FockCutoff,
) -> Result<LindbladGenerator> {
    if !(gamma_bar >= 0.0 && d_bar >= 0.0) {
        return Err(KerrError::InvalidParameters(format!(
            "collective rates must be non-negative (gamma_bar = {gamma_bar}, d_bar = {d_bar})"
        )));
    }
    let c = collective_mode(g1, g2, cutoff)?;
    let nc = c.adjoint().mul(&c);
    let hamiltonian = lin(&[(delta_w, &nc), (chi_c, &nc.mul(&nc))]);
    let mut jumps = Vec::new();
    if gamma_bar > 0.0 {
        jumps.push(JumpTerm::new(2.0 * gamma_bar, c));
    }
    if d_bar > 0.0 {
        jumps.push(JumpTerm::new(2.0 * d_bar, nc));
    }
    LindbladGenerator::new(hamiltonian, jumps, cutoff)
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn symmetrize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for r in 0..n {
        for c in r..n {
            let v = 0.5 * (m[(r, c)] + m[(c, r)].conj());
            m[(r, c)] = v;
            m[(c, r)] = v.conj();
        }
    }
}

fn combo(y: &DMatrix<C64>, h: f64, terms: &[(f64, &DMatrix<C64>)]) -> DMatrix<C64> {
    let mut out = y.clone();
    for (c, k) in terms {
        if *c != 0.0 {
            out.zip_apply(k, |o, x| *o += x * (h * c));
        }
    }
    out
}

struct Outcome {
    state: DMatrix<C64>,
    time: f64,
    settled: bool,
}

/// Integrates to `t_end`, stopping early once `max |dρ/dt| < settle` if
/// given.
fn drive(gen: &LindbladGenerator, rho0: &DMatrix<C64>, t_end: f64, tol: f64, settle: Option<f64>) -> Result<Outcome> {
    let mut y = rho0.clone();
    let mut k1 = gen.apply(&y);
    if let Some(s) = settle {
        if max_abs(&k1) < s {
            return Ok(Outcome { state: y, time: 0.0, settled: true });
        }
    }
    if t_end == 0.0 {
        return Ok(Outcome { state: y, time: 0.0, settled: false });
    }
    let scale = |a: f64| tol + tol * a;
    let d0 = max_abs(&y) / scale(max_abs(&y));
    let d1 = max_abs(&k1) / scale(max_abs(&y));
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(t_end);
    {
        let y1 = combo(&y, h, &[(1.0, &k1)]);
        let f1 = gen.apply(&y1);
        let d2 = max_abs(&(f1 - &k1)) / scale(max_abs(&y)) / h;
        let big = d1.max(d2);
        let h1 = if big <= 1e-15 { (h * 1e-3).max(1e-6) } else { (0.01 / big).powf(0.2) };
        h = (100.0 * h).min(h1).min(t_end);
    }

    let mut t = 0.0;
    let mut k7 = DMatrix::zeros(y.nrows(), y.ncols());
    loop {
        let last = t + h >= t_end * (1.0 - 1e-14);
        if last {
            h = t_end - t;
        }
        let k2 = gen.apply(&combo(&y, h, &[(A21, &k1)]));
        let k3 = gen.apply(&combo(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = gen.apply(&combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = gen.apply(&combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = gen.apply(&combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = combo(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        gen.apply_into(&y_new, &mut k7);

        let mut err = 0.0f64;
        for i in 0..y.len() {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = scale(y[i].norm().max(y_new[i].norm()));
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            err = 1e10;
        }

        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y = y_new;
            symmetrize(&mut y);
            symmetrize(&mut k7);
            std::mem::swap(&mut k1, &mut k7);
            if let Some(s) = settle {
                if max_abs(&k1) < s {
                    return Ok(Outcome { state: y, time: t, settled: true });
                }
            }
            if last {
                return Ok(Outcome { state: y, time: t, settled: false });
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
        if h < 1e-12 * t_end {
            return Err(KerrError::StepSizeUnderflow { step: h, time: t });
        }
    }
}

fn check_run(rho0: &TwoModeDensity, gen: &LindbladGenerator, t: f64, tol: f64) -> Result<()> {
    if rho0.cutoff() != gen.cutoff() {
        return Err(KerrError::DimensionMismatch(format!(
            "state cutoff {} differs from generator cutoff {}",
            rho0.cutoff().n_max(),
            gen.cutoff().n_max()
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(KerrError::InvalidParameters(format!("time must be finite and non-negative, got {t}")));
    }
    if !(tol > 0.0) {
        return Err(KerrError::InvalidParameters(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

/// `ρ(t)` under a time-independent generator.
pub fn integrate(rho0: &TwoModeDensity, gen: &LindbladGenerator, t: f64, tol: f64) -> Result<TwoModeDensity> {
    check_run(rho0, gen, t, tol)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let out = drive(gen, rho0.matrix(), t, tol, None)?;
    TwoModeDensity::new(out.state, rho0.cutoff(), rho0.is_normalized())
}

/// Result of [`steady_state_probe`].
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: TwoModeDensity,
    pub converged: bool,
    /// Time at which integration stopped.
    pub time: f64,
}

/// Integrates until `max |dρ/dt| < settle_tol` or the horizon is reached.
pub fn steady_state_probe(
    rho0: &TwoModeDensity,
    gen: &LindbladGenerator,
    horizon: f64,
    settle_tol: f64,
) -> Result<SteadyState> {
    check_run(rho0, gen, horizon, DEFAULT_TOL)?;
    if !(horizon > 0.0) {
        return Err(KerrError::InvalidParameters(format!("horizon must be positive, got {horizon}")));
    }
    // local error well below the settle threshold so the stop is genuine
    let tol = (settle_tol * 1e-2).min(DEFAULT_TOL);
    let out = drive(gen, rho0.matrix(), horizon, tol, Some(settle_tol))?;
    Ok(SteadyState {
        state: TwoModeDensity::new(out.state, rho0.cutoff(), rho0.is_normalized())?,
        converged: out.settled,
        time: out.time,
    })
}

/// Extra photon numbers per mode used by [`coherent_pair_reference`].
pub const DEFAULT_PADDING: usize = 4;

/// Oracle counterpart of the closed-form solution: integrates the coherent
/// product `|α₁⟩|α₂⟩` on a cutoff enlarged by `padding`, then keeps the
/// block of `cutoff` and renormalizes it.
///
/// Integrating directly on `cutoff` misses the population flowing down from
/// the truncated levels, which shows up in the coherences at the square
/// root of the neglected tail.
pub fn coherent_pair_reference(
    alpha1: CoherentAmplitude,
    alpha2: CoherentAmplitude,
    t: f64,
    p: &KerrLossParams,
    cutoff: FockCutoff,
    padding: usize,
    tol: f64,
) -> Result<TwoModeDensity> {
    let big = FockCutoff::new(cutoff.n_max() + padding)?;
    let rho0 = tensor_product(&coherent_density(alpha1, big)?, &coherent_density(alpha2, big)?)?;
    let gen = build_cross_kerr_generator(p, big)?;
    Ok(integrate(&rho0, &gen, t, tol)?.restrict(cutoff)?.normalized())
}
