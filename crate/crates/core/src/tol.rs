//! Shared numerical tolerances.

/// Symmetry tolerance for Hermitian inputs.
pub const HERMITIAN: f64 = 1e-10;
/// Relative threshold below which an eigenvalue counts as exactly zero
/// (scaled by `max(1, ‖A‖₂)`).
pub const SUPPORT: f64 = 1e-12;
/// Default eigenvalue grouping distance for spectral decompositions.
pub const GROUP: f64 = 1e-8;
/// Absolute threshold for a vanishing outcome probability.
pub const ZERO_PROBABILITY: f64 = 1e-12;
/// Normalization tolerance for probability vectors.
pub const NORMALIZATION: f64 = 1e-12;
/// Trace, positivity and projector tolerances for operators.
pub const OPERATOR: f64 = 1e-10;
/// Trace-norm leakage outside `supp σ` that still counts as contained.
pub const SUPPORT_LEAK: f64 = 1e-10;
/// Most negative relative entropy accepted (and clamped to zero).
pub const NEGATIVE_ENTROPY_CLAMP: f64 = 1e-10;

/// The tolerances above as one record, for callers that want to override them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub hermitian: f64,
    pub support: f64,
    pub group: f64,
    pub zero_probability: f64,
    pub normalization: f64,
    pub operator: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: HERMITIAN,
            support: SUPPORT,
            group: GROUP,
            zero_probability: ZERO_PROBABILITY,
            normalization: NORMALIZATION,
            operator: OPERATOR,
        }
    }
}
