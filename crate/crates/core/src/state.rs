//! Density operators, projective decompositions of observables, and seeded
//! sampling of random test instances.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, EigenDecomposition};
use crate::math;
use crate::tol;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
}

impl DensityOperator {
    /// Validates and wraps a matrix. Eigenvalues in `[−1e-10, 0)` are clamped to zero.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::InvalidState("dimension must be positive"));
        }
        if !matrix.is_hermitian(tol::OPERATOR) {
            return Err(Error::NonHermitianInput(matrix.hermiticity_defect()));
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol::OPERATOR || trace.im.abs() > tol::OPERATOR {
            return Err(Error::InvalidState("trace differs from 1"));
        }
        let herm = matrix.hermitian_part();
        let eig = hermitian_eig(&herm)?;
        let lowest = eig.eigenvalues[0];
        if lowest < -tol::OPERATOR {
            return Err(Error::InvalidState("negative eigenvalue"));
        }
        if lowest < 0.0 {
            let clamped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
            return Ok(Self { matrix: eig.synthesize(&clamped) });
        }
        Ok(Self { matrix: herm })
    }

    pub fn from_diagonal(probabilities: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_diagonal(probabilities))
    }

    /// `I/n`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: ComplexMatrix::identity(dim).scaled(1.0 / dim as f64) }
    }

    /// `|ψ⟩⟨ψ|` for the normalized `ψ`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm = math::sqrt(psi.iter().map(|z| z.norm_sqr()).sum());
        if norm == 0.0 {
            return Err(Error::InvalidState("zero state vector"));
        }
        let unit: Vec<Complex64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&unit, &unit))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eig(&self) -> EigenDecomposition {
        crate::linalg::hermitian_eig_unchecked(&self.matrix)
    }

    /// Number of eigenvalues above the clamping threshold.
    pub fn rank(&self) -> usize {
        self.eig().rank()
    }

    /// `U ρ U*`.
    pub fn conjugated_by(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(self.matrix.conjugated_by(u))
    }

    /// Convex combination `tρ + (1−t)σ`.
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        Self::new(&self.matrix.scaled(t) + &other.matrix.scaled(1.0 - t))
    }
}

/// One block `(λ, P, rank P)` of a spectral decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub lambda: f64,
    pub projector: ComplexMatrix,
    pub rank: usize,
}

/// `O = Σ λ_i P_i` with orthogonal, complete projectors and strictly
/// increasing `λ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveDecomposition {
    dim: usize,
    blocks: Vec<Block>,
}

impl ProjectiveDecomposition {
    pub fn new(dim: usize, blocks: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        if dim == 0 || blocks.is_empty() {
            return Err(Error::InvalidDecomposition("empty decomposition"));
        }
        let mut out: Vec<Block> = Vec::with_capacity(blocks.len());
        let mut total = ComplexMatrix::zeros(dim);
        for (lambda, projector) in blocks {
            if projector.dim() != dim {
                return Err(Error::DimensionMismatch(dim, projector.dim()));
            }
            if !lambda.is_finite() {
                return Err(Error::InvalidDecomposition("non-finite eigenvalue"));
            }
            if !projector.is_projector(tol::OPERATOR) {
                return Err(Error::InvalidDecomposition("block is not a Hermitian idempotent"));
            }
            let rank = math::round(projector.real_trace()) as usize;
            if rank == 0 {
                return Err(Error::InvalidDecomposition("zero projector"));
            }
            if let Some(prev) = out.last() {
                if lambda <= prev.lambda {
                    return Err(Error::InvalidDecomposition("eigenvalues must be strictly increasing"));
                }
            }
            total += &projector;
            out.push(Block { lambda, projector, rank });
        }
        for i in 0..out.len() {
            for j in (i + 1)..out.len() {
                if (&out[i].projector * &out[j].projector).max_abs() > tol::OPERATOR {
                    return Err(Error::InvalidDecomposition("projectors are not mutually orthogonal"));
                }
            }
        }
        if (&total - &ComplexMatrix::identity(dim)).max_abs() > tol::OPERATOR {
            return Err(Error::InvalidDecomposition("projectors do not sum to the identity"));
        }
        Ok(Self { dim, blocks: out })
    }

    /// Labels the projectors `λ_i = 1, 2, …` in the given order.
    pub fn from_projectors(projectors: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = projectors.first().map(ComplexMatrix::dim).unwrap_or(0);
        Self::new(dim, projectors.into_iter().enumerate().map(|(i, p)| ((i + 1) as f64, p)).collect())
    }

    /// Rank-one projectors onto the standard basis vectors.
    pub fn computational_basis(dim: usize) -> Self {
        let cells: Vec<Vec<usize>> = (0..dim).map(|i| vec![i]).collect();
        Self::diagonal_cells(dim, &cells).expect("standard basis is a valid decomposition")
    }

    /// Diagonal projectors onto the coordinate sets `cells`.
    pub fn diagonal_cells(dim: usize, cells: &[Vec<usize>]) -> Result<Self> {
        let mut projectors = Vec::with_capacity(cells.len());
        for cell in cells {
            let mut diag = vec![0.0; dim];
            for &k in cell {
                if k >= dim {
                    return Err(Error::InvalidPartition(dim));
                }
                diag[k] = 1.0;
            }
            projectors.push(ComplexMatrix::from_diagonal(&diag));
        }
        Self::from_projectors(projectors).map_err(|e| match e {
            Error::InvalidDecomposition(_) => Error::InvalidPartition(dim),
            other => other,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn projector(&self, i: usize) -> &ComplexMatrix {
        &self.blocks[i].projector
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.rank).collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.lambda).collect()
    }

    /// `Σ λ_i P_i`.
    pub fn observable(&self) -> ComplexMatrix {
        let mut o = ComplexMatrix::zeros(self.dim);
        for b in &self.blocks {
            o += &b.projector.scaled(b.lambda);
        }
        o
    }

    /// Orthonormal basis (as columns) of each block's range.
    pub fn block_bases(&self) -> Vec<Vec<Vec<Complex64>>> {
        self.blocks
            .iter()
            .map(|b| {
                let eig = crate::linalg::hermitian_eig_unchecked(&b.projector);
                (self.dim - b.rank..self.dim).map(|k| eig.eigenvector(k)).collect()
            })
            .collect()
    }

    /// `Σ P_i A P_i`.
    pub fn pinch(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim);
        for b in &self.blocks {
            out += &(&(&b.projector * a) * &b.projector);
        }
        out
    }

    /// Every projector conjugated by `U`.
    pub fn conjugated_by(&self, u: &ComplexMatrix) -> Result<Self> {
        Self::new(self.dim, self.blocks.iter().map(|b| (b.lambda, b.projector.conjugated_by(u))).collect())
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.blocks.len() {
            return Err(Error::InvalidBlockIndex { index: k, blocks: self.blocks.len() });
        }
        Ok(())
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim {
            return Err(Error::DimensionMismatch(self.dim, dim));
        }
        Ok(())
    }
}

/// Nonnegative probabilities summing to one, aligned with a decomposition's blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockProbabilities {
    p: Vec<f64>,
}

impl BlockProbabilities {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        check_distribution(&p)?;
        Ok(Self { p })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

pub(crate) fn check_distribution(p: &[f64]) -> Result<()> {
    if let Some(&bad) = p.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::NegativeProbability(bad));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tol::NORMALIZATION {
        return Err(Error::NotNormalized(sum));
    }
    Ok(())
}

/// Groups the spectrum of `O` into blocks of eigenvalues closer than `group_tol`
/// (transitive closure over sorted neighbours).
pub fn spectral_decompose(o: &ComplexMatrix, group_tol: f64) -> Result<ProjectiveDecomposition> {
    let eig = hermitian_eig(o)?;
    let n = o.dim();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if eig.eigenvalues[k] - eig.eigenvalues[*g.last().unwrap()] < group_tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    let blocks = groups
        .iter()
        .map(|g| {
            let lambda = g.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / g.len() as f64;
            let mut p = ComplexMatrix::zeros(n);
            for &k in g {
                let v = eig.eigenvector(k);
                p += &ComplexMatrix::outer(&v, &v);
            }
            (lambda, p)
        })
        .collect();
    ProjectiveDecomposition::new(n, blocks)
}

/// `tr(ρ P_i)` for each block, with round-off negatives clamped to zero.
pub fn block_trace(rho: &DensityOperator, pvm: &ProjectiveDecomposition) -> Result<Vec<f64>> {
    pvm.check_dim(rho.dim())?;
    Ok(pvm.blocks().iter().map(|b| rho.matrix().trace_product(&b.projector).re.max(0.0)).collect())
}

/// The generator behind every seeded sampler.
pub type SeededRng = ChaCha8Rng;

/// Deterministic generator for a seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `G G*/tr(G G*)` with `G` a `dim × rank` complex Ginibre matrix.
pub fn random_density_with<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> Result<DensityOperator> {
    if dim == 0 || rank == 0 || rank > dim {
        return Err(Error::InvalidRank { rank, dim });
    }
    let g: Vec<Vec<Complex64>> = (0..dim).map(|_| (0..rank).map(|_| complex_gaussian(rng)).collect()).collect();
    let mut m = ComplexMatrix::from_fn(dim, |i, j| g[i].iter().zip(&g[j]).map(|(a, b)| a * b.conj()).sum());
    let tr = m.real_trace();
    m = m.scaled(1.0 / tr);
    DensityOperator::new(m)
}

/// Seeded [`random_density_with`].
pub fn random_density(dim: usize, rank: usize, seed: u64) -> Result<DensityOperator> {
    random_density_with(dim, rank, &mut seeded_rng(seed))
}

/// Haar-distributed unitary from the QR factorization of a complex Gaussian
/// matrix, with `R` normalized to a positive diagonal.
pub fn haar_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..dim).map(|_| (0..dim).map(|_| complex_gaussian(rng)).collect()).collect();
    // Modified Gram-Schmidt, two passes. Dividing by the (positive) norm leaves
    // R with a positive real diagonal, which is the phase convention Haar needs.
    for j in 0..dim {
        for _ in 0..2 {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let qi = &done[i];
                let proj: Complex64 = qi.iter().zip(rest[0].iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, q) in rest[0].iter_mut().zip(qi) {
                    *x -= q * proj;
                }
            }
        }
        let norm = math::sqrt(cols[j].iter().map(|z| z.norm_sqr()).sum());
        for x in cols[j].iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

pub fn haar_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    haar_unitary_with(dim, &mut seeded_rng(seed))
}

/// Projectors onto consecutive column groups of a Haar unitary; `λ_i = i` (1-based).
pub fn random_pvm_with<R: Rng + ?Sized>(dim: usize, block_ranks: &[usize], rng: &mut R) -> Result<ProjectiveDecomposition> {
    if dim == 0 || block_ranks.is_empty() || block_ranks.contains(&0) || block_ranks.iter().sum::<usize>() != dim {
        return Err(Error::InvalidBlockRanks { dim });
    }
    let v = haar_unitary_with(dim, rng);
    let mut projectors = Vec::with_capacity(block_ranks.len());
    let mut start = 0;
    for &r in block_ranks {
        let mut p = ComplexMatrix::zeros(dim);
        for k in start..start + r {
            let col = v.column(k);
            p += &ComplexMatrix::outer(&col, &col);
        }
        projectors.push(p.hermitian_part());
        start += r;
    }
    ProjectiveDecomposition::from_projectors(projectors)
}

/// Seeded [`random_pvm_with`].
pub fn random_pvm(dim: usize, block_ranks: &[usize], seed: u64) -> Result<ProjectiveDecomposition> {
    random_pvm_with(dim, block_ranks, &mut seeded_rng(seed))
}

/// Random Hermitian matrix `(G + G*)/2` with Gaussian entries.
pub fn random_hermitian_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| complex_gaussian(rng));
    g.hermitian_part()
}

pub fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
    random_hermitian_with(dim, &mut seeded_rng(seed))
}

/// Unitary `Σ_i U_i` acting independently (Haar) inside every block.
pub fn random_block_unitary_with<R: Rng + ?Sized>(pvm: &ProjectiveDecomposition, rng: &mut R) -> ComplexMatrix {
    let dim = pvm.dim();
    let mut u = ComplexMatrix::zeros(dim);
    for basis in pvm.block_bases() {
        let local = haar_unitary_with(basis.len(), rng);
        u += &ComplexMatrix::expand(&local, &basis, dim);
    }
    u
}
