//! Compressed-row sparse operators on the truncated two-mode space.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::fock::{FockCutoff, ModeIndex};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Square sparse matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside dimension {dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { dim, row_ptr, cols, vals }.pruned()
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn diagonal(values: impl IntoIterator<Item = C64>) -> Self {
        let t: Vec<_> = values.into_iter().enumerate().map(|(i, v)| (i, i, v)).collect();
        Self::from_triplets(t.len(), t)
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != ZERO {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), t)
    }

    fn pruned(self) -> Self {
        if self.vals.iter().all(|v| *v != ZERO) {
            return self;
        }
        let t = self.triplets().filter(|t| t.2 != ZERO).collect();
        Self::from_triplets(self.dim, t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |i| (r, self.cols[i], self.vals[i]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        (self.row_ptr[r]..self.row_ptr[r + 1])
            .find(|&i| self.cols[i] == c)
            .map_or(ZERO, |i| self.vals[i])
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (r, c, v * s)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()).collect())
    }

    /// Sparse product `self · other`.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut acc = vec![ZERO; self.dim];
        let mut touched = Vec::new();
        let mut t = Vec::new();
        for r in 0..self.dim {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (k, a) = (self.cols[i], self.vals[i]);
                for j in other.row_ptr[k]..other.row_ptr[k + 1] {
                    let c = other.cols[j];
                    if acc[c] == ZERO {
                        touched.push(c);
                    }
                    acc[c] += a * other.vals[j];
                }
            }
            for c in touched.drain(..) {
                t.push((r, c, acc[c]));
                acc[c] = ZERO;
            }
        }
        Self::from_triplets(self.dim, t)
    }

    /// Largest `|A − A†|` element.
    pub fn hermiticity_defect(&self) -> f64 {
        self.triplets()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `out += s · A · rho`.
    pub fn left_mul_acc(&self, rho: &DMatrix<C64>, s: C64, out: &mut DMatrix<C64>) {
        let n = rho.ncols();
        for r in 0..self.dim {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                let a = s * self.vals[i];
                let k = self.cols[i];
                for c in 0..n {
                    out[(r, c)] += a * rho[(k, c)];
                }
            }
        }
    }

    /// `out += s · rho · A†`.
    pub fn right_mul_adjoint_acc(&self, rho: &DMatrix<C64>, s: C64, out: &mut DMatrix<C64>) {
        // (ρA†)[:, j] = Σ_k ρ[:, k] · conj(A[j, k])
        for j in 0..self.dim {
            for i in self.row_ptr[j]..self.row_ptr[j + 1] {
                let a = s * self.vals[i].conj();
                let k = self.cols[i];
                let (src, mut dst) = (rho.column(k), out.column_mut(j));
                for (d, x) in dst.iter_mut().zip(src.iter()) {
                    *d += a * x;
                }
            }
        }
    }
}

/// Annihilation operator of one mode on the two-mode space.
pub fn lowering(mode: ModeIndex, cutoff: FockCutoff) -> SparseOp {
    let d = cutoff.dim();
    let mut t = Vec::new();
    for k in 0..d {
        for m in 0..d {
            let (n, target) = match mode {
                ModeIndex::First => (k, k.checked_sub(1).map(|k1| k1 * d + m)),
                ModeIndex::Second => (m, m.checked_sub(1).map(|m1| k * d + m1)),
            };
            if let Some(row) = target {
                t.push((row, k * d + m, C64::new((n as f64).sqrt(), 0.0)));
            }
        }
    }
    SparseOp::from_triplets(d * d, t)
}

/// Number operator of one mode on the two-mode space.
pub fn number(mode: ModeIndex, cutoff: FockCutoff) -> SparseOp {
    let d = cutoff.dim();
    SparseOp::diagonal((0..d * d).map(|i| {
        let n = match mode {
            ModeIndex::First => i / d,
            ModeIndex::Second => i % d,
        };
        C64::new(n as f64, 0.0)
    }))
}
