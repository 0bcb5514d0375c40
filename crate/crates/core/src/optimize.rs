//! Numerical minimization of `σ ↦ D(ρ, σ)` over commuting constraint sets,
//! and first-order optimality checks.
//!
//! Two constraint sets are supported, both for a projective decomposition
//! `{P_i}`:
//!
//! - weak: all states with `[P_i, σ] = 0` for every `i` (block diagonal),
//! - Jeffrey: additionally `tr(σ P_i) = p_i`.
//!
//! Both are products of scaled density-matrix blocks, so the minimizer works
//! block by block with entropic mirror descent:
//! `σ_i ← normalize(exp(ln σ_i − η c_i G_i))`, where `G_i` is the block of the
//! gradient of `−tr(ρ ln σ)` and `c_i` rescales each block's step by the
//! inverse of its Lagrange multiplier so every block contracts at the same
//! rate. Positivity and the trace constraints hold by construction. The
//! iterate is kept in factored form (eigenvectors and log-eigenvalues), so no
//! eigenvalue is ever exponentiated outside of a normalization.
//!
//! Inside each block the iteration runs on the support of `P_i ρ P_i`; the
//! remaining coordinates are fixed at zero. [`boundary_case_check`] verifies
//! that this boundary placement is optimal through the inward derivatives.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::collapse::{check_jeffrey_support, jeffrey_collapse, weak_collapse};
use crate::entropy::{relative_entropy, ExtendedReal};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig_unchecked, ComplexMatrix};
use crate::math;
use crate::state::{block_trace, seeded_rng, BlockProbabilities, DensityOperator, ProjectiveDecomposition};
use crate::tol;

/// Default objective / first-order tolerance.
pub const DEFAULT_OPT_TOL: f64 = 1e-9;
/// Default feasibility tolerance.
pub const DEFAULT_FEAS_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintKind {
    /// `[P_i, σ] = 0` for all `i`.
    Weak,
    /// Additionally `tr(σ P_i) = p_i`.
    Jeffrey(BlockProbabilities),
}

/// A feasible set for the information projection.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub pvm: ProjectiveDecomposition,
    pub kind: ConstraintKind,
}

impl ConstraintSet {
    pub fn weak(pvm: ProjectiveDecomposition) -> Self {
        Self { pvm, kind: ConstraintKind::Weak }
    }

    pub fn jeffrey(pvm: ProjectiveDecomposition, p: BlockProbabilities) -> Result<Self> {
        if p.len() != pvm.len() {
            return Err(Error::LengthMismatch(p.len(), pvm.len()));
        }
        Ok(Self { pvm, kind: ConstraintKind::Jeffrey(p) })
    }

    pub fn targets(&self) -> Option<&[f64]> {
        match &self.kind {
            ConstraintKind::Weak => None,
            ConstraintKind::Jeffrey(p) => Some(p.as_slice()),
        }
    }

    /// Largest violation among `‖[P_i, σ]‖_F` and `|tr(σ P_i) − p_i|`.
    pub fn feasibility_residual(&self, sigma: &ComplexMatrix) -> Result<f64> {
        self.pvm.check_dim(sigma.dim())?;
        let mut worst: f64 = 0.0;
        for (i, b) in self.pvm.blocks().iter().enumerate() {
            worst = worst.max(b.projector.commutator(sigma).frobenius_norm());
            if let Some(p) = self.targets() {
                worst = worst.max((sigma.trace_product(&b.projector).re - p[i]).abs());
            }
        }
        Ok(worst)
    }

    pub fn is_feasible(&self, sigma: &DensityOperator, feas_tol: f64) -> Result<bool> {
        Ok(self.feasibility_residual(sigma.matrix())? <= feas_tol)
    }

    /// The closed-form collapse state for this set: pinching for weak, the
    /// Jeffrey update otherwise.
    pub fn analytic_minimizer(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        Ok(match &self.kind {
            ConstraintKind::Weak => weak_collapse(rho, &self.pvm)?.post_state,
            ConstraintKind::Jeffrey(p) => jeffrey_collapse(rho, &self.pvm, p)?.post_state,
        })
    }

    /// `Σ t_i P_i / r_i` with `t_i = r_i/n` (weak) or `t_i = p_i` (Jeffrey).
    pub fn blockwise_uniform(&self) -> DensityOperator {
        let n = self.pvm.dim() as f64;
        let mut m = ComplexMatrix::zeros(self.pvm.dim());
        for (i, b) in self.pvm.blocks().iter().enumerate() {
            let t = self.targets().map_or(b.rank as f64 / n, |p| p[i]);
            m += &b.projector.scaled(t / b.rank as f64);
        }
        DensityOperator::new(m).expect("blockwise uniform point is a state")
    }
}

/// A feasible direction at `σ`.
#[derive(Clone, Debug, PartialEq)]
pub enum TangentDirection {
    /// `σ ↦ e^{tL} σ e^{−tL}` with `L` anti-Hermitian and supported on
    /// `range(P_block)`.
    BlockUnitary { block: usize, generator: ComplexMatrix },
    /// Moves eigenvalue mass from atom `from` to atom `to` of the
    /// block-adapted eigenbasis of `σ` (see [`block_spectrum`]).
    SpectrumTransfer { from: usize, to: usize, within_block: bool },
}

/// One eigenpair of `σ` restricted to a block.
#[derive(Clone, Debug)]
pub struct SpectralAtom {
    pub block: usize,
    pub value: f64,
    pub vector: Vec<Complex64>,
}

/// Eigenpairs of each block `P_i σ P_i`, concatenated in block order with
/// ascending eigenvalues inside each block.
pub fn block_spectrum(sigma: &ComplexMatrix, pvm: &ProjectiveDecomposition) -> Result<Vec<SpectralAtom>> {
    pvm.check_dim(sigma.dim())?;
    let mut atoms = Vec::with_capacity(sigma.dim());
    for (i, basis) in pvm.block_bases().into_iter().enumerate() {
        let eig = hermitian_eig_unchecked(&sigma.compress(&basis).hermitian_part());
        for k in 0..basis.len() {
            let local = eig.eigenvector(k);
            let mut vector = vec![Complex64::new(0.0, 0.0); sigma.dim()];
            for (w, c) in basis.iter().zip(&local) {
                for (x, wx) in vector.iter_mut().zip(w) {
                    *x += wx * c;
                }
            }
            atoms.push(SpectralAtom { block: i, value: eig.eigenvalues[k], vector });
        }
    }
    Ok(atoms)
}

/// First divided difference of `ln`, from values and their logarithms.
fn log_divided_difference(x: f64, y: f64, ln_x: f64, ln_y: f64) -> f64 {
    if x == y {
        return 1.0 / x;
    }
    let d = x - y;
    if d.abs() > 0.5 * x.max(y) {
        (ln_x - ln_y) / d
    } else {
        math::ln_1p(d / y) / d
    }
}

/// `G̃ = −φ ∘ ρ̃` in the eigenbasis of `σ`, where `ρ̃ = V* ρ V`.
fn gradient_in_eigenbasis(rho_tilde: &ComplexMatrix, values: &[f64], logs: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(values.len(), |j, k| {
        -rho_tilde[(j, k)] * log_divided_difference(values[j], values[k], logs[j], logs[k])
    })
}

/// Hermitian `G` with `tr(G H) = d/dt −tr(ρ ln(σ + tH))|₀` for Hermitian `H`,
/// via the divided-difference form of the derivative of `ln`.
pub fn objective_gradient(rho: &DensityOperator, sigma: &DensityOperator) -> Result<ComplexMatrix> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let eig = sigma.eig();
    let lowest = eig.eigenvalues[0];
    if lowest < eig.zero_threshold() {
        return Err(Error::SingularState(lowest));
    }
    let logs: Vec<f64> = eig.eigenvalues.iter().map(|&l| math::ln(l)).collect();
    let v = &eig.eigenvectors;
    let rho_tilde = &(&v.adjoint() * rho.matrix()) * v;
    let g = gradient_in_eigenbasis(&rho_tilde, &eig.eigenvalues, &logs);
    Ok((&(v * &g) * &v.adjoint()).hermitian_part())
}

/// Precomputed data for evaluating many directional derivatives of
/// `D(ρ, ·)` at one point `σ`.
#[derive(Clone, Debug)]
pub struct DerivativeProbe {
    rho: ComplexMatrix,
    atoms: Vec<SpectralAtom>,
    /// `⟨u_k|ρ|u_k⟩` per atom.
    rho_weights: Vec<f64>,
    /// `ln σ` on its support, zero on the kernel.
    log_sigma: ComplexMatrix,
    kernel: ComplexMatrix,
    zero: f64,
}

impl DerivativeProbe {
    pub fn new(rho: &DensityOperator, sigma: &DensityOperator, pvm: &ProjectiveDecomposition) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
        }
        let atoms = block_spectrum(sigma.matrix(), pvm)?;
        let zero = tol::SUPPORT * atoms.iter().fold(1.0f64, |m, a| m.max(a.value.abs()));
        let n = sigma.dim();
        let mut log_sigma = ComplexMatrix::zeros(n);
        let mut kernel = ComplexMatrix::zeros(n);
        let mut rho_weights = Vec::with_capacity(atoms.len());
        for a in &atoms {
            let outer = ComplexMatrix::outer(&a.vector, &a.vector);
            if a.value > zero {
                log_sigma += &outer.scaled(math::ln(a.value));
            } else {
                kernel += &outer;
            }
            rho_weights.push(rho.matrix().expectation(&a.vector));
        }
        Ok(Self { rho: rho.matrix().clone(), atoms, rho_weights, log_sigma, kernel, zero })
    }

    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    fn is_zero(&self, k: usize) -> bool {
        self.atoms[k].value <= self.zero
    }

    /// `ρ_kk / κ_k`, with `0/0 = 0` and `x/0 = ∞`.
    fn ratio(&self, k: usize) -> f64 {
        let r = self.rho_weights[k];
        if self.is_zero(k) {
            if r <= tol::SUPPORT_LEAK {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            r / self.atoms[k].value
        }
    }

    /// One-sided derivative of `D(ρ, ·)` at `σ` along `dir`.
    pub fn derivative(&self, dir: &TangentDirection) -> Result<f64> {
        match dir {
            TangentDirection::SpectrumTransfer { from, to, within_block } => {
                let (k, l) = (*from, *to);
                if k >= self.atoms.len() || l >= self.atoms.len() || k == l {
                    return Err(Error::UndefinedDirection);
                }
                if *within_block != (self.atoms[k].block == self.atoms[l].block) {
                    return Err(Error::UndefinedDirection);
                }
                if self.is_zero(k) {
                    return Err(Error::UndefinedDirection);
                }
                // D(σ + tH) = const − Σ_j ρ_jj ln κ_j(t) along H = |u_l⟩⟨u_l| − |u_k⟩⟨u_k|.
                let to_ratio = self.ratio(l);
                if to_ratio.is_infinite() {
                    return Ok(f64::NEG_INFINITY);
                }
                Ok(self.ratio(k) - to_ratio)
            }
            TangentDirection::BlockUnitary { generator, .. } => {
                if generator.dim() != self.rho.dim() {
                    return Err(Error::DimensionMismatch(self.rho.dim(), generator.dim()));
                }
                // Rotating the support of σ away from ρ makes D infinite immediately.
                let leak = (&(&self.kernel * generator) * &self.rho).frobenius_norm();
                if leak > tol::SUPPORT_LEAK * generator.frobenius_norm().max(1.0) {
                    return Ok(f64::INFINITY);
                }
                // d/dt −tr(ρ e^{tL} ln σ e^{−tL}) = tr(L [ρ, ln σ])
                Ok(generator.trace_product(&self.rho.commutator(&self.log_sigma)).re)
            }
        }
    }
}

/// One-sided derivative of `D(ρ, ·)` at `σ` along `dir`; spectrum-transfer
/// indices refer to [`block_spectrum`]`(σ, pvm)`.
pub fn directional_derivative(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    pvm: &ProjectiveDecomposition,
    dir: &TangentDirection,
) -> Result<f64> {
    DerivativeProbe::new(rho, sigma, pvm)?.derivative(dir)
}

/// A direction with a negative derivative.
#[derive(Clone, Debug)]
pub struct Witness {
    pub direction: TangentDirection,
    pub derivative: f64,
}

#[derive(Clone, Debug)]
pub struct FirstOrderReport {
    pub min_derivative: f64,
    /// Directions with derivative below `−DEFAULT_OPT_TOL`.
    pub witnesses: Vec<Witness>,
}

/// Random anti-Hermitian generator supported on one block, unit Frobenius norm.
pub fn random_block_generator<R: Rng + ?Sized>(pvm: &ProjectiveDecomposition, block: usize, rng: &mut R) -> ComplexMatrix {
    let basis = &pvm.block_bases()[block];
    let h = crate::state::random_hermitian_with(basis.len(), rng);
    let a = h.scaled_complex(Complex64::new(0.0, 1.0));
    let norm = a.frobenius_norm();
    let a = if norm > 0.0 { a.scaled(1.0 / norm) } else { a };
    ComplexMatrix::expand(&a, basis, pvm.dim())
}

/// Samples random feasible directions at `σ` and reports the smallest
/// directional derivative. Spectrum transfers out of a zero eigenvalue are
/// flipped so they point into the set.
pub fn check_first_order(
    rho: &DensityOperator,
    sigma: &DensityOperator,
    cset: &ConstraintSet,
    n_directions: usize,
    seed: u64,
) -> Result<FirstOrderReport> {
    let residual = cset.feasibility_residual(sigma.matrix())?;
    if residual > DEFAULT_FEAS_TOL {
        return Err(Error::InfeasiblePoint(residual));
    }
    let probe = DerivativeProbe::new(rho, sigma, &cset.pvm)?;
    let within_only = matches!(cset.kind, ConstraintKind::Jeffrey(_));
    let n = probe.atoms().len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|k| (0..n).map(move |l| (k, l)))
        .filter(|&(k, l)| k != l)
        .filter(|&(k, l)| !within_only || probe.atoms[k].block == probe.atoms[l].block)
        .filter(|&(k, l)| !(probe.is_zero(k) && probe.is_zero(l)))
        .collect();

    let mut rng = seeded_rng(seed);
    let mut min_derivative = f64::INFINITY;
    let mut witnesses = Vec::new();
    for _ in 0..n_directions {
        let direction = if !pairs.is_empty() && rng.random_bool(0.5) {
            let (mut k, mut l) = pairs[rng.random_range(0..pairs.len())];
            if probe.is_zero(k) {
                core::mem::swap(&mut k, &mut l);
            }
            TangentDirection::SpectrumTransfer { from: k, to: l, within_block: probe.atoms[k].block == probe.atoms[l].block }
        } else {
            let block = rng.random_range(0..cset.pvm.len());
            TangentDirection::BlockUnitary { block, generator: random_block_generator(&cset.pvm, block, &mut rng) }
        };
        let derivative = probe.derivative(&direction)?;
        min_derivative = min_derivative.min(derivative);
        if derivative < -DEFAULT_OPT_TOL {
            witnesses.push(Witness { direction, derivative });
        }
    }
    Ok(FirstOrderReport { min_derivative, witnesses })
}

/// Step-size rule for [`minimize`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSchedule {
    pub initial: f64,
    /// Halvings tried per iteration before declaring stagnation.
    pub max_halvings: u32,
}

impl Default for StepSchedule {
    fn default() -> Self {
        Self { initial: 0.5, max_halvings: 40 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinimizeOptions {
    pub max_iter: usize,
    pub step_schedule: StepSchedule,
    /// Bound on the most negative directional derivative at a converged point.
    pub opt_tol: f64,
    pub feas_tol: f64,
    /// Iteration stops once every basis directional derivative is below this
    /// in magnitude.
    pub stationarity_tol: f64,
    /// Seeds the random directions sampled by [`boundary_case_check`]; the
    /// descent itself is deterministic.
    pub seed: u64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            step_schedule: StepSchedule::default(),
            opt_tol: DEFAULT_OPT_TOL,
            feas_tol: DEFAULT_FEAS_TOL,
            stationarity_tol: 1e-13,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizationResult {
    pub minimizer: DensityOperator,
    pub objective: ExtendedReal,
    pub iterations: usize,
    pub converged: bool,
    /// Most negative directional derivative found at the minimizer (≤ 0).
    pub max_negative_directional_derivative: f64,
    pub feasibility_residual: f64,
    /// Objective `D(ρ, σ)` of every accepted iterate, starting point first;
    /// nonincreasing up to rounding of the objective.
    pub objective_trace: Vec<f64>,
}

impl MinimizationResult {
    /// `Err(NotConverged)` unless the run converged.
    pub fn into_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged(self.iterations))
        }
    }
}

/// One optimized block: `X = V diag(exp(logs)) V*` in the coordinates of `face`.
struct FaceBlock {
    face: Vec<Vec<Complex64>>,
    rho: ComplexMatrix,
    /// `tr(ρ)` on the face.
    mass: f64,
    /// Fixed block trace (Jeffrey) or `None` (weak).
    target: Option<f64>,
    vectors: ComplexMatrix,
    logs: Vec<f64>,
}

impl FaceBlock {
    fn values(&self) -> Vec<f64> {
        self.logs.iter().map(|&l| math::exp(l)).collect()
    }

    fn rho_in_eigenbasis(&self) -> ComplexMatrix {
        &(&self.vectors.adjoint() * &self.rho) * &self.vectors
    }

    /// `−tr(ρ ln X)` restricted to this block.
    fn cross_term(&self) -> f64 {
        let rt = self.rho_in_eigenbasis();
        -(0..self.logs.len()).map(|k| rt[(k, k)].re * self.logs[k]).sum::<f64>()
    }

    fn assemble(&self, dim: usize) -> ComplexMatrix {
        let x = hermitian_from(&self.vectors, &self.values());
        ComplexMatrix::expand(&x, &self.face, dim)
    }
}

fn hermitian_from(vectors: &ComplexMatrix, values: &[f64]) -> ComplexMatrix {
    let n = values.len();
    let mut out = ComplexMatrix::zeros(n);
    for (k, &d) in values.iter().enumerate() {
        for i in 0..n {
            let vik = vectors[(i, k)] * d;
            for j in 0..n {
                out[(i, j)] += vik * vectors[(j, k)].conj();
            }
        }
    }
    out
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    m + math::ln(values.map(|v| math::exp(v - m)).sum::<f64>())
}

/// Per-block data for the descent: the face `supp(P_i ρ P_i)` and the
/// compressed state on it. Blocks that must stay zero are dropped.
fn build_faces(rho: &DensityOperator, cset: &ConstraintSet) -> Result<Vec<FaceBlock>> {
    let born = block_trace(rho, &cset.pvm)?;
    if let ConstraintKind::Jeffrey(p) = &cset.kind {
        check_jeffrey_support(&born, p)?;
    }
    let mut faces = Vec::new();
    for (i, basis) in cset.pvm.block_bases().into_iter().enumerate() {
        let target = cset.targets().map(|p| p[i]);
        if target == Some(0.0) {
            continue;
        }
        let local = rho.matrix().compress(&basis).hermitian_part();
        let eig = hermitian_eig_unchecked(&local);
        let thr = eig.zero_threshold();
        let face: Vec<Vec<Complex64>> = (0..basis.len())
            .filter(|&k| eig.eigenvalues[k] > thr)
            .map(|k| {
                let c = eig.eigenvector(k);
                let mut v = vec![Complex64::new(0.0, 0.0); rho.dim()];
                for (w, ck) in basis.iter().zip(&c) {
                    for (x, wx) in v.iter_mut().zip(w) {
                        *x += wx * ck;
                    }
                }
                v
            })
            .collect();
        if face.is_empty() {
            if target.is_some_and(|t| t > tol::ZERO_PROBABILITY) {
                return Err(Error::DegenerateConstraint(i));
            }
            continue;
        }
        let rho_face = rho.matrix().compress(&face).hermitian_part();
        let mass = rho_face.real_trace();
        faces.push(FaceBlock {
            vectors: ComplexMatrix::identity(face.len()),
            logs: vec![0.0; face.len()],
            face,
            rho: rho_face,
            mass,
            target,
        });
    }
    if faces.is_empty() {
        return Err(Error::InvalidState("no block carries weight"));
    }
    // blockwise-uniform start on the faces
    let total: usize = faces.iter().map(|f| f.face.len()).sum();
    for f in &mut faces {
        let t = f.target.unwrap_or(f.face.len() as f64 / total as f64);
        let log = math::ln(t / f.face.len() as f64);
        f.logs.iter_mut().for_each(|l| *l = log);
    }
    Ok(faces)
}

/// Largest magnitude among the basis directional derivatives of the current
/// iterate: spectrum transfers (within blocks, or across blocks when block
/// traces are free) and block-unitary rotations.
fn stationarity_residual(faces: &[FaceBlock], free_traces: bool) -> f64 {
    let mut residual: f64 = 0.0;
    let mut global = (f64::INFINITY, f64::NEG_INFINITY);
    for f in faces {
        let rt = f.rho_in_eigenbasis();
        let values = f.values();
        let mut local = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..values.len() {
            let g = rt[(k, k)].re / values[k];
            local = (local.0.min(g), local.1.max(g));
            for j in (k + 1)..values.len() {
                // [ρ̃, ln X]_jk = ρ̃_jk (ln κ_k − ln κ_j)
                let c = rt[(j, k)] * (f.logs[k] - f.logs[j]);
                residual = residual.max(core::f64::consts::SQRT_2 * math::sqrt(c.norm_sqr()));
            }
        }
        residual = residual.max(local.1 - local.0);
        global = (global.0.min(local.0), global.1.max(local.1));
    }
    if free_traces {
        residual = residual.max(global.1 - global.0);
    }
    residual
}

/// Tries one mirror step of size `eta`; returns the candidate blocks.
fn mirror_step(faces: &[FaceBlock], eta: f64) -> Vec<(ComplexMatrix, Vec<f64>)> {
    let mut raw = Vec::with_capacity(faces.len());
    for f in faces {
        let rt = f.rho_in_eigenbasis();
        let values = f.values();
        let g = gradient_in_eigenbasis(&rt, &values, &f.logs);
        // Multiplier of the block is tr(ρ)/t; scaling by its inverse gives
        // every block the same local contraction rate.
        let scale = f.target.map_or(1.0, |t| t / f.mass);
        let m = ComplexMatrix::from_fn(values.len(), |j, k| {
            let d = if j == k { Complex64::new(f.logs[j], 0.0) } else { Complex64::new(0.0, 0.0) };
            d - g[(j, k)] * (eta * scale)
        });
        let eig = hermitian_eig_unchecked(&m.hermitian_part());
        raw.push((&f.vectors * &eig.eigenvectors, eig.eigenvalues));
    }
    if faces[0].target.is_none() {
        let z = log_sum_exp(raw.iter().flat_map(|(_, l)| l.iter().copied()));
        for (_, logs) in raw.iter_mut() {
            logs.iter_mut().for_each(|l| *l -= z);
        }
    } else {
        for ((_, logs), f) in raw.iter_mut().zip(faces) {
            let z = log_sum_exp(logs.iter().copied()) - math::ln(f.target.unwrap());
            logs.iter_mut().for_each(|l| *l -= z);
        }
    }
    raw
}

fn cross_entropy(faces: &[FaceBlock]) -> f64 {
    faces.iter().map(FaceBlock::cross_term).sum()
}

/// `−tr(ρ ln X)` of a candidate, and the rounding noise of that value:
/// each block of `ln X` carries an error of order `ε·max|ln κ|`.
fn candidate_cross_entropy(faces: &[FaceBlock], candidate: &[(ComplexMatrix, Vec<f64>)]) -> (f64, f64) {
    let mut value = 0.0;
    let mut noise = 0.0;
    for (face, (v, logs)) in faces.iter().zip(candidate) {
        let rt = &(&v.adjoint() * &face.rho) * v;
        value -= logs.iter().enumerate().map(|(k, &l)| rt[(k, k)].re * l).sum::<f64>();
        noise += face.mass * logs.iter().fold(1.0f64, |m, l| m.max(l.abs()));
    }
    (value, 16.0 * f64::EPSILON * noise)
}

/// Iterations without a new best stationarity residual before giving up.
const STAGNATION_WINDOW: usize = 25;

/// Minimizes `D(ρ, ·)` over `cset` by blockwise entropic mirror descent.
///
/// A run that exhausts `max_iter` or stalls above `opt_tol` returns its last
/// iterate with `converged = false`.
pub fn minimize(rho: &DensityOperator, cset: &ConstraintSet, opts: &MinimizeOptions) -> Result<MinimizationResult> {
    cset.pvm.check_dim(rho.dim())?;
    let mut faces = build_faces(rho, cset)?;
    let free_traces = cset.targets().is_none();
    let own: f64 = rho.eig().clamped_eigenvalues().iter().filter(|&&x| x > 0.0).map(|&x| x * math::ln(x)).sum();

    let mut f = cross_entropy(&faces);
    let mut objective_trace = vec![own + f];
    let mut iterations = 0;
    let mut residual = stationarity_residual(&faces, free_traces);
    let mut best = residual;
    let mut since_best = 0;
    while iterations < opts.max_iter && residual > opts.stationarity_tol && since_best < STAGNATION_WINDOW {
        let mut eta = opts.step_schedule.initial;
        let mut accepted = false;
        for _ in 0..=opts.step_schedule.max_halvings {
            let candidate = mirror_step(&faces, eta);
            let (trial, noise) = candidate_cross_entropy(&faces, &candidate);
            // Near the optimum the true decrease drops below the rounding
            // noise of the objective; such steps are still accepted.
            if trial <= f + noise {
                for (face, (v, logs)) in faces.iter_mut().zip(candidate) {
                    face.vectors = v;
                    face.logs = logs;
                }
                f = trial;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if !accepted {
            break;
        }
        iterations += 1;
        objective_trace.push(own + f);
        residual = stationarity_residual(&faces, free_traces);
        if residual < best {
            best = residual;
            since_best = 0;
        } else {
            since_best += 1;
        }
    }

    let mut sigma = ComplexMatrix::zeros(rho.dim());
    for face in &faces {
        sigma += &face.assemble(rho.dim());
    }
    let minimizer = DensityOperator::new(sigma.hermitian_part())?;
    let feasibility_residual = cset.feasibility_residual(minimizer.matrix())?;
    let objective = relative_entropy(rho, &minimizer)?;
    let max_negative_directional_derivative = -residual;
    let converged = residual <= opts.opt_tol && feasibility_residual <= opts.feas_tol;
    Ok(MinimizationResult {
        minimizer,
        objective,
        iterations,
        converged,
        max_negative_directional_derivative,
        feasibility_residual,
        objective_trace,
    })
}

/// [`minimize`] for a rank-deficient `ρ`, followed by the boundary
/// certificate: every transfer of eigenvalue mass from the support of the
/// minimizer into its kernel must have a nonnegative derivative, and randomly
/// sampled feasible directions (seeded by `opts.seed`) must show no descent.
pub fn boundary_case_check(rho: &DensityOperator, cset: &ConstraintSet, opts: &MinimizeOptions) -> Result<MinimizationResult> {
    if rho.rank() == rho.dim() {
        return Err(Error::InvalidState("boundary analysis needs a rank-deficient state"));
    }
    let mut result = minimize(rho, cset, opts)?;
    let probe = DerivativeProbe::new(rho, &result.minimizer, &cset.pvm)?;
    let within_only = cset.targets().is_some();
    let mut worst = result.max_negative_directional_derivative;
    for k in 0..probe.atoms.len() {
        if probe.is_zero(k) {
            continue;
        }
        for l in 0..probe.atoms.len() {
            if !probe.is_zero(l) || (within_only && probe.atoms[k].block != probe.atoms[l].block) {
                continue;
            }
            let within_block = probe.atoms[k].block == probe.atoms[l].block;
            worst = worst.min(probe.derivative(&TangentDirection::SpectrumTransfer { from: k, to: l, within_block })?);
        }
    }
    let sampled = check_first_order(rho, &result.minimizer, cset, 64, opts.seed)?;
    worst = worst.min(sampled.min_derivative.min(0.0));
    result.max_negative_directional_derivative = worst;
    result.converged = result.converged && worst >= -opts.opt_tol;
    Ok(result)
}
