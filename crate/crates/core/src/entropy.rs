//! Umegaki relative entropy, von Neumann entropy and discrete KL divergence,
//! all in nats.

use crate::error::{Error, Result};
use crate::math;
use crate::state::{check_distribution, DensityOperator};
use crate::tol;

/// A value in `[0, ∞]`; infinity is an explicit state rather than an overflow.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Self::Finite(x) => Some(x),
            Self::Infinite => None,
        }
    }

    /// As an `f64`, with `+∞` for the infinite state.
    pub fn to_f64(&self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// The sign-flipped view `S = −D` (relative entropy in the
    /// "entropy is maximized" convention); `−∞` for the infinite state.
    pub fn negated(&self) -> f64 {
        -self.to_f64()
    }
}

fn xlogx_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().filter(|&x| x > 0.0).map(|x| x * math::ln(x)).sum()
}

fn clamp_divergence(d: f64) -> Result<ExtendedReal> {
    if d < -tol::NEGATIVE_ENTROPY_CLAMP {
        return Err(Error::NumericalInconsistency(d));
    }
    Ok(ExtendedReal::Finite(d.max(0.0)))
}

/// `D(ρ, σ) = tr(ρ ln ρ − ρ ln σ)`, `+∞` when `supp ρ ⊄ supp σ`.
///
/// Support containment is decided by the trace of `ρ` outside the support
/// projector of `σ` (eigenvalues clamped at the shared threshold).
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<ExtendedReal> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    let sigma_eig = sigma.eig();
    let thr = sigma_eig.zero_threshold();
    let mut leak = 0.0;
    let mut cross = 0.0;
    for (k, &s) in sigma_eig.eigenvalues.iter().enumerate() {
        let weight = rho.matrix().expectation(&sigma_eig.eigenvector(k));
        if s < thr {
            leak += weight;
        } else {
            cross += weight * math::ln(s);
        }
    }
    if leak >= tol::SUPPORT_LEAK {
        return Ok(ExtendedReal::Infinite);
    }
    let own = xlogx_sum(rho.eig().clamped_eigenvalues());
    clamp_divergence(own - cross)
}

/// `−Σ κ ln κ` over the nonzero eigenvalues of `ρ`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    (-xlogx_sum(rho.eig().clamped_eigenvalues())).max(0.0)
}

/// `Σ p_k ln(p_k / q_k)` with `0 ln 0 = 0`; `+∞` if `p_k > 0 = q_k` for some `k`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<ExtendedReal> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    check_distribution(p)?;
    check_distribution(q)?;
    let mut d = 0.0;
    for (&pk, &qk) in p.iter().zip(q) {
        if pk == 0.0 {
            continue;
        }
        if qk == 0.0 {
            return Ok(ExtendedReal::Infinite);
        }
        d += pk * (math::ln(pk) - math::ln(qk));
    }
    clamp_divergence(d)
}
