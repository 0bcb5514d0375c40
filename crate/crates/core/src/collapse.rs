//! State-update maps for projective measurements.
//!
//! - weak: `ρ ↦ Σ P_i ρ P_i` (the outcome is not read off),
//! - strong: `ρ ↦ P_k ρ P_k / tr(ρ P_k)` (outcome `k` observed),
//! - Jeffrey: `ρ ↦ Σ p_i P_i ρ P_i / tr(ρ P_i)` (outcome `i` believed with
//!   probability `p_i`).
//!
//! Block indices are 0-based.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{trace_distance, ComplexMatrix};
use crate::state::{block_trace, BlockProbabilities, DensityOperator, ProjectiveDecomposition};
use crate::tol;

/// Which rule produced a [`CollapseOutcome`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RuleTag {
    Weak,
    Strong { block: usize },
    Jeffrey,
}

#[derive(Clone, Debug)]
pub struct CollapseOutcome {
    pub post_state: DensityOperator,
    /// Born weights `tr(ρ P_i)` of the pre-measurement state.
    pub outcome_probabilities: Vec<f64>,
    pub rule: RuleTag,
}

fn compressed(rho: &DensityOperator, p: &ComplexMatrix) -> ComplexMatrix {
    &(p * rho.matrix()) * p
}

pub fn weak_collapse(rho: &DensityOperator, pvm: &ProjectiveDecomposition) -> Result<CollapseOutcome> {
    let outcome_probabilities = block_trace(rho, pvm)?;
    let post_state = DensityOperator::new(pvm.pinch(rho.matrix()))?;
    Ok(CollapseOutcome { post_state, outcome_probabilities, rule: RuleTag::Weak })
}

pub fn strong_collapse(rho: &DensityOperator, pvm: &ProjectiveDecomposition, k: usize) -> Result<CollapseOutcome> {
    pvm.check_index(k)?;
    let outcome_probabilities = block_trace(rho, pvm)?;
    let weight = outcome_probabilities[k];
    if weight <= tol::ZERO_PROBABILITY {
        return Err(Error::ZeroProbabilityOutcome(k));
    }
    let post_state = DensityOperator::new(compressed(rho, pvm.projector(k)).scaled(1.0 / weight))?;
    Ok(CollapseOutcome { post_state, outcome_probabilities, rule: RuleTag::Strong { block: k } })
}

/// Blocks with `p_i = 0` contribute nothing; `p_i > 0` on a block the state
/// never reaches is a [`Error::DegenerateConstraint`].
pub fn jeffrey_collapse(rho: &DensityOperator, pvm: &ProjectiveDecomposition, p: &BlockProbabilities) -> Result<CollapseOutcome> {
    if p.len() != pvm.len() {
        return Err(Error::LengthMismatch(p.len(), pvm.len()));
    }
    let outcome_probabilities = block_trace(rho, pvm)?;
    check_jeffrey_support(&outcome_probabilities, p)?;
    let mut sigma = ComplexMatrix::zeros(pvm.dim());
    for (i, (&target, &weight)) in p.as_slice().iter().zip(&outcome_probabilities).enumerate() {
        if target > 0.0 {
            sigma += &compressed(rho, pvm.projector(i)).scaled(target / weight);
        }
    }
    let post_state = DensityOperator::new(sigma)?;
    Ok(CollapseOutcome { post_state, outcome_probabilities, rule: RuleTag::Jeffrey })
}

pub(crate) fn check_jeffrey_support(born: &[f64], p: &BlockProbabilities) -> Result<()> {
    for (i, (&target, &weight)) in p.as_slice().iter().zip(born).enumerate() {
        if target > tol::ZERO_PROBABILITY && weight <= tol::ZERO_PROBABILITY {
            return Err(Error::DegenerateConstraint(i));
        }
        if target > 0.0 && weight <= 0.0 {
            return Err(Error::DegenerateConstraint(i));
        }
    }
    Ok(())
}

/// Jeffrey weights putting `p1` on block `k` and spreading `1 − p1` over the
/// other blocks in proportion to their Born weights.
pub fn proportional_weights(born: &[f64], k: usize, p1: f64) -> Result<BlockProbabilities> {
    let rest: f64 = born.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, w)| w).sum();
    let residual = 1.0 - p1;
    let p = born
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            if i == k {
                p1
            } else if residual == 0.0 {
                0.0
            } else if rest > 0.0 {
                residual * w / rest
            } else {
                f64::NAN
            }
        })
        .collect::<Vec<_>>();
    if p.iter().any(|x| x.is_nan()) {
        // Residual mass has nowhere to go but blocks the state never reaches.
        let blocked = (0..born.len()).find(|&i| i != k).unwrap_or(k);
        return Err(Error::DegenerateConstraint(blocked));
    }
    // renormalize against round-off in the proportional split
    let sum: f64 = p.iter().sum();
    BlockProbabilities::new(p.into_iter().map(|x| x / sum).collect())
}

/// Trace distance from the Jeffrey update to the strong collapse onto block
/// `k`, along `p_k = p1` for each entry of `p1_sequence`.
pub fn strong_limit_trace(
    rho: &DensityOperator,
    pvm: &ProjectiveDecomposition,
    k: usize,
    p1_sequence: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let strong = strong_collapse(rho, pvm, k)?;
    let born = &strong.outcome_probabilities;
    p1_sequence
        .iter()
        .map(|&p1| {
            if !(p1 > 0.0 && p1 <= 1.0) {
                return Err(Error::NegativeProbability(p1));
            }
            let weights = proportional_weights(born, k, p1)?;
            let jeffrey = jeffrey_collapse(rho, pvm, &weights)?;
            let d = trace_distance(jeffrey.post_state.matrix(), strong.post_state.matrix())?;
            Ok((p1, d))
        })
        .collect()
}
