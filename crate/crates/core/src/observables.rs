//! Phase-space quasi-probabilities, quadrature conditioning and
//! entanglement negativity.
//!
//! Conventions: `∫W d²β = 1` with the vacuum peak `W(0) = 2/π`, and the
//! quadrature `x = (a + a†)/√2`, so the vacuum has `⟨x²⟩ = ½`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{KerrError, Result};
use crate::fock::{coherent_vector, DensityOperator, ModeIndex, SingleModeDensity, TwoModeDensity};

/// Largest tolerated `|∫W − 1|` for [`min_wigner`].
pub const COVERAGE_TOL: f64 = 1e-3;

/// Largest tolerated Hermiticity defect of a partial transpose.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Rectangular grid over the complex amplitude plane, end points included.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSpaceGrid {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub n_re: usize,
    pub n_im: usize,
}

impl PhaseSpaceGrid {
    pub fn new(re: (f64, f64), im: (f64, f64), n_re: usize, n_im: usize) -> Result<Self> {
        let g = Self {
            re_min: re.0,
            re_max: re.1,
            im_min: im.0,
            im_max: im.1,
            n_re,
            n_im,
        };
        g.check()?;
        Ok(g)
    }

    /// Square grid `[−r, r]²` with `n` points per axis.
    pub fn square(r: f64, n: usize) -> Result<Self> {
        Self::new((-r, r), (-r, r), n, n)
    }

    pub fn check(&self) -> Result<()> {
        let mut bad = Vec::new();
        if [self.re_min, self.re_max, self.im_min, self.im_max].iter().any(|v| !v.is_finite()) {
            bad.push("bounds must be finite".to_string());
        }
        if !(self.re_max > self.re_min) {
            bad.push(format!("re_max {} must exceed re_min {}", self.re_max, self.re_min));
        }
        if !(self.im_max > self.im_min) {
            bad.push(format!("im_max {} must exceed im_min {}", self.im_max, self.im_min));
        }
        if self.n_re < 2 || self.n_im < 2 {
            bad.push(format!("need at least 2 points per axis, got {}x{}", self.n_re, self.n_im));
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(KerrError::InvalidGrid(bad.join("; ")))
        }
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn d_re(&self) -> f64 {
        (self.re_max - self.re_min) / (self.n_re - 1) as f64
    }

    pub fn d_im(&self) -> f64 {
        (self.im_max - self.im_min) / (self.n_im - 1) as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.d_re() * self.d_im()
    }

    /// Point `i` in row-major order: real part outer, imaginary part inner.
    pub fn point(&self, i: usize) -> C64 {
        let (r, c) = (i / self.n_im, i % self.n_im);
        C64::new(
            self.re_min + r as f64 * self.d_re(),
            self.im_min + c as f64 * self.d_im(),
        )
    }

    pub fn points(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Real field sampled on a grid, row-major like [`PhaseSpaceGrid::point`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<f64>,
}

impl ScalarField {
    /// Samples `f` at every grid point in parallel; the output order is the
    /// grid order regardless of worker count.
    pub fn sample(grid: PhaseSpaceGrid, f: impl Fn(C64) -> f64 + Sync) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    /// `Σ values × cell area`.
    pub fn riemann_integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    /// Smallest value and where it sits.
    pub fn min(&self) -> (f64, C64) {
        let (i, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
        (v, self.grid.point(i))
    }

    pub fn max(&self) -> (f64, C64) {
        let (i, v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
        (v, self.grid.point(i))
    }
}

/// Sampled scalar observable against time.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn last(&self) -> Option<(f64, f64)> {
        Some((*self.t.last()?, *self.values.last()?))
    }
}

/// `⟨m|D(γ)|n⟩` for `m, n < dim`, exact elements of the untruncated
/// displacement operator.
pub fn displacement_elements(gamma: C64, dim: usize) -> DMatrix<C64> {
    let mut d = DMatrix::zeros(dim, dim);
    let mut c = C64::new((-0.5 * gamma.norm_sqr()).exp(), 0.0);
    for m in 0..dim {
        if m > 0 {
            c *= gamma / (m as f64).sqrt();
        }
        d[(m, 0)] = c;
    }
    let gc = gamma.conj();
    // ⟨m|D|n+1⟩ = (√m ⟨m−1|D|n⟩ − γ* ⟨m|D|n⟩)/√(n+1)
    for n in 0..dim - 1 {
        let s = 1.0 / ((n + 1) as f64).sqrt();
        for m in 0..dim {
            let up = if m > 0 { d[(m - 1, n)] * (m as f64).sqrt() } else { C64::new(0.0, 0.0) };
            d[(m, n + 1)] = (up - gc * d[(m, n)]) * s;
        }
    }
    d
}

fn wigner_at(rho: &DMatrix<C64>, beta: C64) -> f64 {
    let dim = rho.nrows();
    let disp = displacement_elements(2.0 * beta, dim);
    // W(β) = (2/π) Σ_kl (−1)^k ρ_kl ⟨l|D(2β)|k⟩
    let mut sum = C64::new(0.0, 0.0);
    for k in 0..dim {
        let mut row = C64::new(0.0, 0.0);
        for l in 0..dim {
            row += rho[(k, l)] * disp[(l, k)];
        }
        if k % 2 == 0 {
            sum += row;
        } else {
            sum -= row;
        }
    }
    2.0 / PI * sum.re
}

/// Wigner function `W(β) = (2/π) Tr[ρ D(β) Π D†(β)]` with parity `Π`.
pub fn wigner(rho: &SingleModeDensity, grid: PhaseSpaceGrid) -> ScalarField {
    let m = rho.matrix();
    ScalarField::sample(grid, |b| wigner_at(m, b))
}

fn q_at(rho: &SingleModeDensity, beta: C64) -> f64 {
    let v = coherent_vector(beta, rho.cutoff());
    rho.expectation_in(&v) / PI
}

/// Husimi function `Q(β) = ⟨β|ρ|β⟩/π`.
pub fn q_function(rho: &SingleModeDensity, grid: PhaseSpaceGrid) -> ScalarField {
    ScalarField::sample(grid, |b| q_at(rho, b))
}

/// Wigner function after a balanced beam splitter with vacuum in the other
/// port: `W_out(β) = 2 Q_in(√2 β)`.
pub fn bs_half_loss_wigner(rho: &SingleModeDensity, grid: PhaseSpaceGrid) -> ScalarField {
    ScalarField::sample(grid, |b| 2.0 * q_at(rho, b * 2f64.sqrt()))
}

/// Normalized Hermite functions `⟨x|n⟩`, `n < dim`.
pub fn hermite_functions(x: f64, dim: usize) -> Vec<f64> {
    let mut psi = vec![0.0; dim];
    psi[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if dim > 1 {
        psi[1] = 2f64.sqrt() * x * psi[0];
    }
    for n in 1..dim.saturating_sub(1) {
        let nf = n as f64;
        psi[n + 1] = (2.0 / (nf + 1.0)).sqrt() * x * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
    }
    psi
}

/// Result of a quadrature measurement on one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureOutcome {
    /// Unnormalized state of the other mode; its trace is the density.
    pub state: SingleModeDensity,
    pub probability_density: f64,
}

/// Conditions the other mode on outcome `x` of the measured mode's
/// `x = (a + a†)/√2` quadrature.
pub fn project_quadrature(rho: &TwoModeDensity, mode: ModeIndex, x: f64) -> QuadratureOutcome {
    let cutoff = rho.cutoff();
    let d = cutoff.dim();
    let h = hermite_functions(x, d);
    let matrix = DMatrix::from_fn(d, d, |k, l| {
        let mut s = C64::new(0.0, 0.0);
        for m in 0..d {
            for n in 0..d {
                let w = h[m] * h[n];
                s += w * match mode {
                    ModeIndex::Second => rho.get(k, l, m, n),
                    ModeIndex::First => rho.get(m, n, k, l),
                };
            }
        }
        s
    });
    let probability_density = matrix.trace().re;
    QuadratureOutcome {
        state: SingleModeDensity::new(matrix, cutoff).expect("dimension fixed by cutoff"),
        probability_density,
    }
}

/// Partial transpose on mode 1: `σ[k,l;m,n] = ρ[l,k;m,n]`.
pub fn partial_transpose(rho: &TwoModeDensity) -> DMatrix<C64> {
    let d = rho.cutoff().dim();
    DMatrix::from_fn(d * d, d * d, |r, c| rho.get(c / d, r / d, r % d, c % d))
}

/// Entanglement negativity: the summed magnitude of the negative
/// eigenvalues of the partial transpose.
pub fn negativity(rho: &TwoModeDensity) -> Result<f64> {
    let s = partial_transpose(rho);
    let adj = s.adjoint();
    let defect = s.iter().zip(adj.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if defect > HERMITIAN_TOL {
        return Err(KerrError::NotHermitian(defect));
    }
    let eig = SymmetricEigen::new((s + adj).scale(0.5)).eigenvalues;
    Ok(eig.iter().filter(|&&l| l < 0.0).map(|l| -l).sum())
}

/// Location and value of the smallest Wigner value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerMinimum {
    pub value: f64,
    pub at: C64,
    /// `|∫W − 1|` on the coarse grid.
    pub normalization_defect: f64,
}

/// Smallest Wigner value over the grid, refined once on a sub-grid four
/// times finer spanning one coarse cell either side of the coarse minimum.
pub fn min_wigner(rho: &SingleModeDensity, grid: PhaseSpaceGrid) -> Result<WignerMinimum> {
    grid.check()?;
    let field = wigner(rho, grid);
    let normalization_defect = (field.riemann_integral() - 1.0).abs();
    if normalization_defect > COVERAGE_TOL {
        return Err(KerrError::GridCoverage(normalization_defect));
    }
    let (coarse, at) = field.min();
    let (dr, di) = (grid.d_re(), grid.d_im());
    let fine = PhaseSpaceGrid {
        re_min: at.re - dr,
        re_max: at.re + dr,
        im_min: at.im - di,
        im_max: at.im + di,
        n_re: 9,
        n_im: 9,
    };
    let (refined, fine_at) = wigner(rho, fine).min();
    let (value, at) = if refined < coarse { (refined, fine_at) } else { (coarse, at) };
    Ok(WignerMinimum {
        value,
        at,
        normalization_defect,
    })
}
