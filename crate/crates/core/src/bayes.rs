//! Discrete updating: Bayes conditioning and the classical Jeffrey rule as
//! the KL projection onto fixed cell masses.

use alloc::vec;
use alloc::vec::Vec;

use crate::collapse::{check_jeffrey_support, jeffrey_collapse};
use crate::error::{Error, Result};
use crate::linalg::{trace_distance, ComplexMatrix};
use crate::state::{check_distribution, BlockProbabilities, DensityOperator, ProjectiveDecomposition};
use crate::tol;

/// Probability vector on a finite outcome set.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_distribution(&weights)?;
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Self {
        Self { weights: vec![1.0 / n as f64; n] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }
}

/// `p(b|x)` for every outcome `x` and one fixed event `b`.
#[derive(Clone, Debug, PartialEq)]
pub struct LikelihoodModel {
    likelihood: Vec<f64>,
}

impl LikelihoodModel {
    pub fn new(likelihood: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = likelihood.iter().find(|&&l| !(0.0..=1.0).contains(&l)) {
            return Err(Error::InvalidLikelihood(bad));
        }
        Ok(Self { likelihood })
    }

    /// Likelihood 1 on `cell`, 0 elsewhere.
    pub fn indicator(n: usize, cell: &[usize]) -> Result<Self> {
        let mut likelihood = vec![0.0; n];
        for &x in cell {
            *likelihood.get_mut(x).ok_or(Error::InvalidPartition(x))? = 1.0;
        }
        Ok(Self { likelihood })
    }

    pub fn values(&self) -> &[f64] {
        &self.likelihood
    }
}

/// `p(x) ↦ p(x) p(b|x) / p(b)`.
pub fn bayes_update(prior: &DiscreteDistribution, lik: &LikelihoodModel) -> Result<DiscreteDistribution> {
    if prior.len() != lik.values().len() {
        return Err(Error::LengthMismatch(prior.len(), lik.values().len()));
    }
    let joint: Vec<f64> = prior.weights.iter().zip(&lik.likelihood).map(|(p, l)| p * l).collect();
    let evidence: f64 = joint.iter().sum();
    if evidence <= tol::ZERO_PROBABILITY {
        return Err(Error::ZeroEvidence(evidence));
    }
    Ok(DiscreteDistribution { weights: joint.into_iter().map(|j| j / evidence).collect() })
}

/// Checks that `partition` splits `0..n` into disjoint, nonempty cells.
fn check_partition(n: usize, partition: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; n];
    for cell in partition {
        if cell.is_empty() {
            return Err(Error::InvalidPartition(0));
        }
        for &x in cell {
            match seen.get_mut(x) {
                Some(s) if !*s => *s = true,
                _ => return Err(Error::InvalidPartition(x)),
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(missing) => Err(Error::InvalidPartition(missing)),
        None => Ok(()),
    }
}

/// The minimizer of `Σ prior ln(prior/q)` subject to `q(cell_i) = target_i`:
/// the prior rescaled inside each cell.
pub fn maxent_update(prior: &DiscreteDistribution, partition: &[Vec<usize>], target: &BlockProbabilities) -> Result<DiscreteDistribution> {
    check_partition(prior.len(), partition)?;
    if partition.len() != target.len() {
        return Err(Error::LengthMismatch(partition.len(), target.len()));
    }
    let masses: Vec<f64> = partition.iter().map(|cell| cell.iter().map(|&x| prior.weights[x]).sum()).collect();
    check_jeffrey_support(&masses, target)?;
    let mut weights = vec![0.0; prior.len()];
    for ((cell, &mass), &t) in partition.iter().zip(&masses).zip(target.as_slice()) {
        if t == 0.0 {
            continue;
        }
        for &x in cell {
            weights[x] = prior.weights[x] * (t / mass);
        }
    }
    Ok(DiscreteDistribution { weights })
}

/// Trace distance between the quantum Jeffrey update of a diagonal state and
/// the diagonal embedding of the classical update on its diagonal.
pub fn quantum_classical_consistency(rho: &DensityOperator, pvm: &ProjectiveDecomposition, p: &BlockProbabilities) -> Result<f64> {
    pvm.check_dim(rho.dim())?;
    let n = rho.dim();
    let off_diagonal = |m: &ComplexMatrix| (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| i != j).fold(0.0f64, |acc, (i, j)| acc.max(m[(i, j)].norm_sqr()));
    if off_diagonal(rho.matrix()) > tol::OPERATOR * tol::OPERATOR
        || pvm.blocks().iter().any(|b| off_diagonal(&b.projector) > tol::OPERATOR * tol::OPERATOR) {
        return Err(Error::NotCommuting);
    }
    let mut partition = Vec::with_capacity(pvm.len());
    for b in pvm.blocks() {
        partition.push((0..n).filter(|&x| b.projector[(x, x)].re > 0.5).collect::<Vec<_>>());
    }
    let diagonal: Vec<f64> = rho.matrix().diagonal_real().iter().map(|x| x.max(0.0)).collect();
    let total: f64 = diagonal.iter().sum();
    let prior = if (total - 1.0).abs() <= tol::NORMALIZATION {
        DiscreteDistribution { weights: diagonal }
    } else {
        DiscreteDistribution::new(diagonal.iter().map(|x| x / total).collect())?
    };
    let classical = maxent_update(&prior, &partition, p)?;
    let quantum = jeffrey_collapse(rho, pvm, p)?.post_state;
    trace_distance(quantum.matrix(), &ComplexMatrix::from_diagonal(classical.weights()))
}
