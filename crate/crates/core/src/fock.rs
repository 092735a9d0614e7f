//! Truncated Fock-space algebra for one and two bosonic modes.
//!
//! A two-mode density matrix is stored as a dense `(d², d²)` matrix with
//! `d = n_max + 1`. The row index of `|k⟩|m⟩` is `k·d + m`, so the element
//! `ρ[k,l;m,n]` (mode-1 indices `k,l`, mode-2 indices `m,n`) lives at
//! `(k·d + m, l·d + n)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{KerrError, Result};

/// Largest neglected Poisson tail mass accepted for a coherent amplitude.
pub const MAX_TAIL_MASS: f64 = 1e-5;

/// Default threshold below which eigenvalues count as a positivity violation.
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Photon-number cutoff per mode; each mode has dimension `n_max + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FockCutoff(usize);

impl FockCutoff {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(KerrError::InvalidParameters(
                "Fock cutoff must be at least 1".into(),
            ));
        }
        Ok(Self(n_max))
    }

    /// Cutoff from the rule of thumb `|α|² + 6|α| + 4`, which keeps the
    /// neglected tail below about 1e-8 for `|α| ≤ 3`.
    pub fn recommended(alpha: f64) -> Self {
        let a = alpha.abs();
        Self(((a * a + 6.0 * a + 4.0).ceil() as usize).max(1))
    }

    pub fn n_max(self) -> usize {
        self.0
    }

    /// Single-mode dimension.
    pub fn dim(self) -> usize {
        self.0 + 1
    }

    /// Two-mode dimension.
    pub fn pair_dim(self) -> usize {
        self.dim() * self.dim()
    }

    /// Poisson mass of a coherent state with amplitude `alpha` above `n_max`.
    pub fn tail_mass(self, alpha: f64) -> f64 {
        let mu = alpha * alpha;
        let mut p = (-mu).exp();
        let mut kept = p;
        for n in 1..=self.0 {
            p *= mu / n as f64;
            kept += p;
        }
        (1.0 - kept).max(0.0)
    }

    pub fn check(self, alpha: CoherentAmplitude) -> Result<()> {
        let a = alpha.abs();
        let tail = self.tail_mass(a);
        if !a.is_finite() || tail > MAX_TAIL_MASS {
            return Err(KerrError::Truncation {
                n_max: self.0,
                alpha: a,
                tail,
                limit: MAX_TAIL_MASS,
            });
        }
        Ok(())
    }
}

/// Complex coherent-state amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CoherentAmplitude(pub C64);

impl CoherentAmplitude {
    pub fn new(re: f64, im: f64) -> Self {
        Self(C64::new(re, im))
    }

    pub fn value(self) -> C64 {
        self.0
    }

    pub fn abs(self) -> f64 {
        self.0.norm()
    }

    pub fn norm_sqr(self) -> f64 {
        self.0.norm_sqr()
    }
}

impl From<f64> for CoherentAmplitude {
    fn from(re: f64) -> Self {
        Self(C64::new(re, 0.0))
    }
}

impl From<C64> for CoherentAmplitude {
    fn from(z: C64) -> Self {
        Self(z)
    }
}

/// Which of the two modes an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModeIndex {
    First,
    Second,
}

impl TryFrom<usize> for ModeIndex {
    type Error = KerrError;

    fn try_from(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            other => Err(KerrError::InvalidMode(other)),
        }
    }
}

/// Fock amplitudes `e^{-|α|²/2} αⁿ/√n!` for `n = 0..=n_max`, not renormalized.
pub fn coherent_vector(alpha: C64, cutoff: FockCutoff) -> DVector<C64> {
    let mut v = DVector::zeros(cutoff.dim());
    let mut c = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    v[0] = c;
    for n in 1..cutoff.dim() {
        c *= alpha / (n as f64).sqrt();
        v[n] = c;
    }
    v
}

/// Anything that can be viewed as a density matrix.
pub trait DensityOperator {
    fn matrix(&self) -> &DMatrix<C64>;

    fn trace(&self) -> C64 {
        self.matrix().trace()
    }
}

/// Density matrix of one truncated mode.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleModeDensity {
    matrix: DMatrix<C64>,
    cutoff: FockCutoff,
}

impl SingleModeDensity {
    pub fn new(matrix: DMatrix<C64>, cutoff: FockCutoff) -> Result<Self> {
        if matrix.nrows() != cutoff.dim() || matrix.ncols() != cutoff.dim() {
            return Err(KerrError::DimensionMismatch(format!(
                "expected {0}x{0}, got {1}x{2}",
                cutoff.dim(),
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, cutoff })
    }

    /// `|ψ⟩⟨ψ|` for the given Fock-basis amplitudes.
    pub fn from_pure(psi: &DVector<C64>, cutoff: FockCutoff) -> Result<Self> {
        Self::new(psi * psi.adjoint(), cutoff)
    }

    /// Fock projector `|n⟩⟨n|`.
    pub fn fock(n: usize, cutoff: FockCutoff) -> Result<Self> {
        if n > cutoff.n_max() {
            return Err(KerrError::DimensionMismatch(format!(
                "Fock state {n} above cutoff {}",
                cutoff.n_max()
            )));
        }
        let mut m = DMatrix::zeros(cutoff.dim(), cutoff.dim());
        m[(n, n)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: m, cutoff })
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn get(&self, k: usize, l: usize) -> C64 {
        self.matrix[(k, l)]
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Copy scaled to unit trace. A zero-trace state is returned unchanged.
    pub fn normalized(&self) -> Self {
        let tr = self.trace().re;
        if tr == 0.0 {
            return self.clone();
        }
        Self {
            matrix: self.matrix.unscale(tr),
            cutoff: self.cutoff,
        }
    }

    /// `⟨ψ|ρ|ψ⟩`; the fidelity when `ψ` is a normalized pure state.
    pub fn expectation_in(&self, psi: &DVector<C64>) -> f64 {
        (psi.adjoint() * &self.matrix * psi)[(0, 0)].re
    }
}

impl DensityOperator for SingleModeDensity {
    fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

/// Density matrix of two truncated modes, `ρ[k,l;m,n]`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeDensity {
    matrix: DMatrix<C64>,
    cutoff: FockCutoff,
    normalized: bool,
}

impl TwoModeDensity {
    pub fn new(matrix: DMatrix<C64>, cutoff: FockCutoff, normalized: bool) -> Result<Self> {
        let d = cutoff.pair_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(KerrError::DimensionMismatch(format!(
                "expected {d}x{d}, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            matrix,
            cutoff,
            normalized,
        })
    }

    /// Builds `ρ[k,l;m,n] = f(k, l, m, n)`.
    pub fn from_fn(
        cutoff: FockCutoff,
        normalized: bool,
        mut f: impl FnMut(usize, usize, usize, usize) -> C64,
    ) -> Self {
        let d = cutoff.dim();
        let matrix = DMatrix::from_fn(d * d, d * d, |row, col| {
            f(row / d, col / d, row % d, col % d)
        });
        Self {
            matrix,
            cutoff,
            normalized,
        }
    }

    /// `|ψ⟩⟨ψ|` for a two-mode amplitude vector indexed `k·d + m`.
    pub fn from_pure(psi: &DVector<C64>, cutoff: FockCutoff) -> Result<Self> {
        Self::new(psi * psi.adjoint(), cutoff, true)
    }

    pub fn vacuum(cutoff: FockCutoff) -> Self {
        Self::fock(0, 0, cutoff)
    }

    /// `|n₁⟩|n₂⟩⟨n₁|⟨n₂|`; panics if either number exceeds the cutoff.
    pub fn fock(n1: usize, n2: usize, cutoff: FockCutoff) -> Self {
        let d = cutoff.dim();
        assert!(n1 < d && n2 < d, "Fock state above cutoff");
        let mut m = DMatrix::zeros(d * d, d * d);
        m[(n1 * d + n2, n1 * d + n2)] = C64::new(1.0, 0.0);
        Self {
            matrix: m,
            cutoff,
            normalized: true,
        }
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Flat index of `|k⟩|m⟩`.
    pub fn index(&self, k: usize, m: usize) -> usize {
        k * self.cutoff.dim() + m
    }

    pub fn get(&self, k: usize, l: usize, m: usize, n: usize) -> C64 {
        let d = self.cutoff.dim();
        self.matrix[(k * d + m, l * d + n)]
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// Copy scaled to unit trace and flagged normalized.
    pub fn normalized(&self) -> Self {
        let tr = self.trace().re;
        let matrix = if tr != 0.0 {
            self.matrix.unscale(tr)
        } else {
            self.matrix.clone()
        };
        Self {
            matrix,
            cutoff: self.cutoff,
            normalized: true,
        }
    }

    /// `⟨ψ|ρ|ψ⟩` for a two-mode amplitude vector.
    pub fn expectation_in(&self, psi: &DVector<C64>) -> f64 {
        (psi.adjoint() * &self.matrix * psi)[(0, 0)].re
    }

    /// `Tr(ρσ)`, which is the fidelity when either state is pure.
    pub fn overlap(&self, other: &TwoModeDensity) -> f64 {
        self.matrix.component_mul(&other.matrix.transpose()).sum().re
    }

    /// Largest element-wise distance to another state of the same cutoff.
    pub fn max_abs_diff(&self, other: &TwoModeDensity) -> f64 {
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// The block with both photon numbers at most `cutoff.n_max()`, left
    /// unnormalized.
    pub fn restrict(&self, cutoff: FockCutoff) -> Result<Self> {
        if cutoff.n_max() > self.cutoff.n_max() {
            return Err(KerrError::DimensionMismatch(format!(
                "cannot restrict cutoff {} to larger cutoff {}",
                self.cutoff.n_max(),
                cutoff.n_max()
            )));
        }
        Ok(Self::from_fn(cutoff, false, |k, l, m, n| self.get(k, l, m, n)))
    }

    /// Population with `n₁ + n₂` above `n_total`.
    pub fn population_above_total(&self, n_total: usize) -> f64 {
        let d = self.cutoff.dim();
        (0..d * d)
            .filter(|i| i / d + i % d > n_total)
            .map(|i| self.matrix[(i, i)].re)
            .sum()
    }

    /// Zeroes every row and column with `n₁ + n₂` above `n_total`.
    pub fn project_total_number(&self, n_total: usize) -> Self {
        let d = self.cutoff.dim();
        let keep = |i: usize| i / d + i % d <= n_total;
        let matrix = DMatrix::from_fn(d * d, d * d, |r, c| {
            if keep(r) && keep(c) {
                self.matrix[(r, c)]
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self {
            matrix,
            cutoff: self.cutoff,
            normalized: false,
        }
    }

    /// Expectation of a diagonal number-basis observable `f(n₁, n₂)`.
    pub fn expect_diagonal(&self, f: impl Fn(usize, usize) -> f64) -> f64 {
        let d = self.cutoff.dim();
        (0..d * d).map(|i| self.matrix[(i, i)].re * f(i / d, i % d)).sum()
    }
}

impl DensityOperator for TwoModeDensity {
    fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }
}

/// Coherent state `|α⟩⟨α|`, renormalized to unit trace on the truncated space.
pub fn coherent_density(alpha: CoherentAmplitude, cutoff: FockCutoff) -> Result<SingleModeDensity> {
    cutoff.check(alpha)?;
    let mut v = coherent_vector(alpha.value(), cutoff);
    let norm = v.norm();
    v.unscale_mut(norm);
    SingleModeDensity::from_pure(&v, cutoff)
}

/// `ρ[k,l;m,n] = ρ₁[k,l]·ρ₂[m,n]`.
pub fn tensor_product(rho1: &SingleModeDensity, rho2: &SingleModeDensity) -> Result<TwoModeDensity> {
    if rho1.cutoff != rho2.cutoff {
        return Err(KerrError::DimensionMismatch(format!(
            "cutoffs differ: {} vs {}",
            rho1.cutoff.n_max(),
            rho2.cutoff.n_max()
        )));
    }
    let matrix = rho1.matrix.kronecker(&rho2.matrix);
    Ok(TwoModeDensity {
        matrix,
        cutoff: rho1.cutoff,
        normalized: true,
    })
}

/// Reduced state of the kept mode.
pub fn partial_trace(rho: &TwoModeDensity, keep: ModeIndex) -> SingleModeDensity {
    let d = rho.cutoff.dim();
    let matrix = match keep {
        ModeIndex::First => DMatrix::from_fn(d, d, |k, l| (0..d).map(|m| rho.get(k, l, m, m)).sum()),
        ModeIndex::Second => DMatrix::from_fn(d, d, |m, n| (0..d).map(|k| rho.get(k, k, m, n)).sum()),
    };
    SingleModeDensity {
        matrix,
        cutoff: rho.cutoff,
    }
}

/// `Tr(ρ²)`.
pub fn purity<D: DensityOperator + ?Sized>(rho: &D) -> f64 {
    let m = rho.matrix();
    // Tr(ρ²) = Σ ρ_ij ρ_ji
    m.component_mul(&m.transpose()).sum().re
}

/// Health report of a density matrix. Never fails and never mutates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    /// Largest `|ρ − ρ†|` element.
    pub hermiticity_defect: f64,
    /// `|Tr ρ − 1|`.
    pub trace_defect: f64,
    /// Smallest eigenvalue of the Hermitian part.
    pub min_eigenvalue: f64,
}

impl Diagnostics {
    /// How far the smallest eigenvalue falls below zero.
    pub fn positivity_defect(&self) -> f64 {
        (-self.min_eigenvalue).max(0.0)
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.hermiticity_defect <= tol
            && self.trace_defect <= tol
            && self.min_eigenvalue >= -POSITIVITY_TOL.max(tol)
    }
}

pub fn validate<D: DensityOperator + ?Sized>(rho: &D) -> Diagnostics {
    let m = rho.matrix();
    let adj = m.adjoint();
    let hermiticity_defect = m
        .iter()
        .zip(adj.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let trace_defect = (m.trace() - C64::new(1.0, 0.0)).norm();
    let herm = (m + &adj).scale(0.5);
    let min_eigenvalue = SymmetricEigen::new(herm)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Diagnostics {
        hermiticity_defect,
        trace_defect,
        min_eigenvalue,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cut(n: usize) -> FockCutoff {
        FockCutoff::new(n).unwrap()
    }

    #[test]
    fn zero_amplitude_is_vacuum() {
        let rho = coherent_density(0.0.into(), cut(5)).unwrap();
        assert_eq!(rho.get(0, 0), C64::new(1.0, 0.0));
        assert!(rho.matrix().iter().skip(1).all(|z| z.norm() == 0.0));
    }

    #[test]
    fn vacuum_weight_before_renormalization() {
        let v = coherent_vector(C64::new(1.0, 0.0), cut(12));
        assert!((v[0].norm_sqr() - (-1.0f64).exp()).abs() < 1e-15);
        assert!((v[0].norm_sqr() - 0.36787944117144233).abs() < 1e-15);
    }

    #[test]
    fn coherent_matches_direct_summation() {
        let alpha = C64::new(0.8, 0.0);
        let c = cut(10);
        let rho = coherent_density(alpha.into(), c).unwrap();
        let fact = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        let mut raw = DMatrix::<C64>::zeros(11, 11);
        for m in 0..11 {
            for n in 0..11 {
                raw[(m, n)] = (-alpha.norm_sqr()).exp() * alpha.powu(m as u32) * alpha.conj().powu(n as u32)
                    / (fact(m) * fact(n)).sqrt();
            }
        }
        let tr = raw.trace();
        for (a, b) in rho.matrix().iter().zip(raw.iter()) {
            assert!((a - b / tr).norm() < 1e-14);
        }
        assert!((purity(&rho) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn truncation_rejected_when_tail_is_large() {
        let err = coherent_density(3.0.into(), cut(8)).unwrap_err();
        assert!(matches!(err, KerrError::Truncation { n_max: 8, .. }));
        assert!(FockCutoff::new(0).is_err());
        assert_eq!(FockCutoff::recommended(1.0).n_max(), 11);
    }

    #[test]
    fn product_of_vacua() {
        let v = coherent_density(0.0.into(), cut(3)).unwrap();
        let rho = tensor_product(&v, &v).unwrap();
        assert_eq!(rho.get(0, 0, 0, 0), C64::new(1.0, 0.0));
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert_eq!(rho.matrix().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn tensor_requires_equal_cutoffs() {
        let a = coherent_density(0.0.into(), cut(3)).unwrap();
        let b = coherent_density(0.0.into(), cut(4)).unwrap();
        assert!(matches!(tensor_product(&a, &b), Err(KerrError::DimensionMismatch(_))));
    }

    #[test]
    fn partial_trace_recovers_factors() {
        let c = cut(8);
        let a = coherent_density(CoherentAmplitude::new(0.5, 0.3), c).unwrap();
        let b = coherent_density(CoherentAmplitude::new(-0.7, 0.1), c).unwrap();
        let rho = tensor_product(&a, &b).unwrap();
        let ra = partial_trace(&rho, ModeIndex::First);
        let rb = partial_trace(&rho, ModeIndex::Second);
        for (x, y) in ra.matrix().iter().zip(a.matrix().iter()) {
            assert!((x - y).norm() < 1e-15);
        }
        for (x, y) in rb.matrix().iter().zip(b.matrix().iter()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!((purity(&rho) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn classical_mixture_reduces_to_half_half() {
        let c = cut(2);
        let mut m = DMatrix::zeros(9, 9);
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(4, 4)] = C64::new(0.5, 0.0); // |1⟩|1⟩
        let rho = TwoModeDensity::new(m, c, true).unwrap();
        for keep in [ModeIndex::First, ModeIndex::Second] {
            let r = partial_trace(&rho, keep);
            assert_eq!(r.get(0, 0).re, 0.5);
            assert_eq!(r.get(1, 1).re, 0.5);
            assert_eq!(purity(&r), 0.5);
        }
        assert_eq!(purity(&rho), 0.5);
    }

    #[test]
    fn entangled_single_photon_state_reduces_to_three_quarters() {
        // ½|ψ₋⟩⟨ψ₋| + ½|00⟩⟨00| with ψ₋ = (|10⟩ − |01⟩)/√2
        let c = cut(1);
        let s = 0.5f64.sqrt();
        let mut psi = DVector::zeros(4);
        psi[2] = C64::new(s, 0.0);
        psi[1] = C64::new(-s, 0.0);
        let mut m = (&psi * psi.adjoint()).scale(0.5);
        m[(0, 0)] += C64::new(0.5, 0.0);
        let rho = TwoModeDensity::new(m, c, true).unwrap();
        let r = partial_trace(&rho, ModeIndex::First);
        assert!((r.get(0, 0).re - 0.75).abs() < 1e-15);
        assert!((r.get(1, 1).re - 0.25).abs() < 1e-15);
        assert!(r.get(0, 1).norm() < 1e-15);
    }

    #[test]
    fn validate_reports_defects() {
        let c = cut(3);
        let vac = coherent_density(0.0.into(), c).unwrap();
        let d = validate(&vac);
        assert_eq!(d.hermiticity_defect, 0.0);
        assert_eq!(d.trace_defect, 0.0);
        assert!(d.min_eigenvalue.abs() < 1e-15);

        let mut m = vac.clone().into_matrix();
        m[(0, 1)] = C64::new(1e-3, 0.0);
        let bad = SingleModeDensity::new(m, c).unwrap();
        let d = validate(&bad);
        assert!((d.hermiticity_defect - 1e-3).abs() < 1e-15);
        // the input is left alone
        assert_eq!(bad.get(0, 1).re, 1e-3);
    }

    #[test]
    fn mode_index_parsing() {
        assert_eq!(ModeIndex::try_from(1).unwrap(), ModeIndex::First);
        assert_eq!(ModeIndex::try_from(2).unwrap(), ModeIndex::Second);
        assert!(matches!(ModeIndex::try_from(3), Err(KerrError::InvalidMode(3))));
    }

    #[test]
    fn purity_equals_sum_of_squared_eigenvalues() {
        let c = cut(8);
        let a = coherent_density(CoherentAmplitude::new(0.9, 0.0), c).unwrap();
        let b = coherent_density(CoherentAmplitude::new(-0.9, 0.0), c).unwrap();
        let mix = SingleModeDensity::new(a.matrix().scale(0.3) + b.matrix().scale(0.7), c).unwrap();
        let eig = SymmetricEigen::new(mix.matrix().clone()).eigenvalues;
        let p: f64 = eig.iter().map(|x| x * x).sum();
        assert!((purity(&mix) - p).abs() < 1e-12);
        assert!(purity(&mix) < 1.0);
    }
}
