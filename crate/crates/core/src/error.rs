use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NonHermitianInput(f64),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("malformed matrix: expected {expected} entries, got {got}")]
    MalformedMatrix { expected: usize, got: usize },

    #[error("function undefined at eigenvalue {0:e}")]
    DomainError(f64),

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("block ranks must be positive and sum to {dim}")]
    InvalidBlockRanks { dim: usize },

    #[error("not a density operator: {0}")]
    InvalidState(&'static str),

    #[error("not a projective decomposition: {0}")]
    InvalidDecomposition(&'static str),

    #[error("block index {index} out of range for {blocks} blocks")]
    InvalidBlockIndex { index: usize, blocks: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("probability vector is not normalized (sum {0})")]
    NotNormalized(f64),

    #[error("negative probability {0}")]
    NegativeProbability(f64),

    #[error("numerical inconsistency: relative entropy evaluated to {0:e}")]
    NumericalInconsistency(f64),

    #[error("outcome {0} has zero probability")]
    ZeroProbabilityOutcome(usize),

    #[error("degenerate constraint: block {0} has positive target weight but zero Born weight")]
    DegenerateConstraint(usize),

    #[error("state is singular (smallest eigenvalue {0:e})")]
    SingularState(f64),

    #[error("direction leaves the positive cone at a zero eigenvalue")]
    UndefinedDirection,

    #[error("point is infeasible (residual {0:e})")]
    InfeasiblePoint(f64),

    #[error("minimization did not converge after {0} iterations")]
    NotConverged(usize),

    #[error("evidence has zero probability ({0:e})")]
    ZeroEvidence(f64),

    #[error("likelihood entry {0} outside [0, 1]")]
    InvalidLikelihood(f64),

    #[error("partition cells must be nonempty, disjoint and cover every outcome (offending outcome {0})")]
    InvalidPartition(usize),

    #[error("inputs are not simultaneously diagonal")]
    NotCommuting,
}

pub type Result<T> = core::result::Result<T, Error>;
