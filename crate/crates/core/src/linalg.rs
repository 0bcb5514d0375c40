//! Dense complex matrices, Hermitian eigendecomposition and functional calculus.
//!
//! Matrices are small (dimension ≤ 64) and stored densely in row-major order.
//! The eigensolver is cyclic complex Jacobi, which gives orthonormal
//! eigenvectors to working precision and high relative accuracy for small
//! eigenvalues, both of which the logarithm-heavy code downstream relies on.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::tol;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A dense `dim × dim` complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::MalformedMatrix { expected: dim * dim, got: entries.len() });
        }
        Ok(Self { dim, entries })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(f(i, j));
            }
        }
        Self { dim, entries }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// The rank-one operator `|u⟩⟨v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        debug_assert_eq!(u.len(), v.len());
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    /// Block-diagonal matrix with the given diagonal blocks.
    pub fn direct_sum(blocks: &[ComplexMatrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut m = Self::zeros(dim);
        let mut offset = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    m[(offset + i, offset + j)] = b[(i, j)];
                }
            }
            offset += b.dim;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Real part of the trace.
    pub fn real_trace(&self) -> f64 {
        self.trace().re
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self[(i, i)].re).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.entries.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| math::sqrt(z.norm_sqr())).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    pub fn scaled_complex(&self, s: Complex64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z * s).collect() }
    }

    /// `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// Largest entry of `|A − A*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = self[(i, j)] - self[(j, i)].conj();
                worst = worst.max(math::sqrt(d.norm_sqr()));
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// Hermitian with smallest eigenvalue ≥ `−tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        match hermitian_eig_unchecked(&self.hermitian_part()).eigenvalues.first() {
            Some(&lo) => lo >= -tol,
            None => true,
        }
    }

    /// Hermitian and idempotent within `tol` (max-entry metric).
    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (&(self * self) - self).max_abs() <= tol
    }

    /// `U A U*`.
    pub fn conjugated_by(&self, u: &ComplexMatrix) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &ComplexMatrix) -> Self {
        &(self * other) - &(other * self)
    }

    /// `tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &ComplexMatrix) -> Complex64 {
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// `⟨u|A|u⟩`, real part.
    pub fn expectation(&self, u: &[Complex64]) -> f64 {
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            let mut row = ZERO;
            for j in 0..n {
                row += self[(i, j)] * u[j];
            }
            acc += u[i].conj() * row;
        }
        acc.re
    }

    /// `W* A W` for a `dim × k` isometry given as its `k` columns.
    pub fn compress(&self, columns: &[Vec<Complex64>]) -> Self {
        let k = columns.len();
        let aw: Vec<Vec<Complex64>> = columns.iter().map(|c| self.apply(c)).collect();
        Self::from_fn(k, |a, b| columns[a].iter().zip(&aw[b]).map(|(x, y)| x.conj() * y).sum())
    }

    /// `W B W*` for a `dim × k` isometry given as its `k` columns; inverse of
    /// [`compress`](Self::compress) on the range of `W`.
    pub fn expand(block: &ComplexMatrix, columns: &[Vec<Complex64>], dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for a in 0..block.dim {
            for b in 0..block.dim {
                let z = block[(a, b)];
                if z == ZERO {
                    continue;
                }
                for i in 0..dim {
                    let zi = columns[a][i] * z;
                    for j in 0..dim {
                        m[(i, j)] += zi * columns[b][j].conj();
                    }
                }
            }
        }
        m
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn check_same_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * rhs.entries[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scaled(-1.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        for (a, b) in self.entries.iter_mut().zip(&rhs.entries) {
            *a -= b;
        }
    }
}

/// Spectral decomposition `A = V Λ V*` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: ComplexMatrix,
}

/// What [`matrix_function`] does with eigenvalues that clamp to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroPolicy {
    /// Evaluate `f(0)`; a non-finite value is a [`Error::DomainError`].
    Strict,
    /// Map the kernel to zero and apply `f` on the support only.
    SupportOnly,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `max |λ|`.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, l| m.max(l.abs()))
    }

    /// Eigenvalues with modulus below this are treated as exactly zero.
    pub fn zero_threshold(&self) -> f64 {
        tol::SUPPORT * self.spectral_norm().max(1.0)
    }

    /// Eigenvalues with near-zero entries replaced by exact zeros.
    pub fn clamped_eigenvalues(&self) -> Vec<f64> {
        let thr = self.zero_threshold();
        self.eigenvalues.iter().map(|&l| if l.abs() < thr { 0.0 } else { l }).collect()
    }

    /// Number of eigenvalues above the zero threshold in modulus.
    pub fn rank(&self) -> usize {
        let thr = self.zero_threshold();
        self.eigenvalues.iter().filter(|l| l.abs() >= thr).count()
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    /// `V diag(values) V*`.
    pub fn synthesize(&self, values: &[f64]) -> ComplexMatrix {
        let n = self.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for (k, &d) in values.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * d;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.synthesize(&self.eigenvalues)
    }

    /// Projector onto the span of eigenvectors with clamped-nonzero eigenvalues.
    pub fn support_projector(&self) -> ComplexMatrix {
        let thr = self.zero_threshold();
        let ones: Vec<f64> = self.eigenvalues.iter().map(|l| if l.abs() >= thr { 1.0 } else { 0.0 }).collect();
        self.synthesize(&ones)
    }

    /// `V f(Λ) V*` under the given zero policy.
    pub fn map(&self, f: impl Fn(f64) -> f64, policy: ZeroPolicy) -> Result<ComplexMatrix> {
        let mut values = Vec::with_capacity(self.dim());
        for l in self.clamped_eigenvalues() {
            let y = if l == 0.0 && policy == ZeroPolicy::SupportOnly { 0.0 } else { f(l) };
            if !y.is_finite() {
                return Err(Error::DomainError(l));
            }
            values.push(y);
        }
        Ok(self.synthesize(&values))
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<EigenDecomposition> {
    let defect = a.hermiticity_defect();
    if defect > tol::HERMITIAN * a.max_abs().max(1.0) {
        return Err(Error::NonHermitianInput(defect));
    }
    Ok(hermitian_eig_unchecked(&a.hermitian_part()))
}

/// Cyclic Jacobi on an exactly Hermitian input.
pub(crate) fn hermitian_eig_unchecked(a: &ComplexMatrix) -> EigenDecomposition {
    const MAX_SWEEPS: usize = 100;
    let n = a.dim;
    let mut m = a.clone();
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = math::hypot(apq.re, apq.im);
                if mag == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                // Below this the rotation cannot change the diagonal in floating point.
                if mag <= f64::EPSILON * 1e-2 * math::sqrt((app * aqq).abs()) || mag < f64::MIN_POSITIVE {
                    m[(p, q)] = ZERO;
                    m[(q, p)] = ZERO;
                    continue;
                }
                rotated = true;
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta >= 0.0 {
                    1.0 / (theta + math::hypot(1.0, theta))
                } else {
                    -1.0 / (-theta + math::hypot(1.0, theta))
                };
                let c = 1.0 / math::hypot(1.0, t);
                let s = t * c;
                // J = [[c, s·e^{iφ}], [−s·e^{−iφ}, c]] on (p, q); M ← J* M J, V ← V J.
                let s_phase = phase * s;
                let s_phase_conj = s_phase.conj();
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * c - mkq * s_phase_conj;
                    m[(k, q)] = mkp * s_phase + mkq * c;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = mpk * c - mqk * s_phase;
                    m[(q, k)] = mpk * s_phase_conj + mqk * c;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * s_phase_conj;
                    v[(k, q)] = vkp * s_phase + vkq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    EigenDecomposition { eigenvalues, eigenvectors }
}

/// `f(A) = V f(Λ) V*` for Hermitian `A`.
pub fn matrix_function(a: &ComplexMatrix, f: impl Fn(f64) -> f64, zero_policy: ZeroPolicy) -> Result<ComplexMatrix> {
    hermitian_eig(a)?.map(f, zero_policy)
}

/// `½‖A − B‖₁` for Hermitian `A`, `B`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.check_same_dim(b)?;
    let eig = hermitian_eig(&(a - b))?;
    Ok(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>())
}

/// `‖AB − BA‖_F`.
pub fn commutator_norm(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.check_same_dim(b)?;
    Ok(a.commutator(b).frobenius_norm())
}
