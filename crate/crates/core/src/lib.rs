//! # mre-core
//!
//! Finite-dimensional quantum information primitives for studying state
//! updates as constrained minimization of the Umegaki relative entropy
//! `D(ρ,σ) = tr(ρ ln ρ − ρ ln σ)`.
//!
//! The crate is `no_std` (with `alloc`) and is organised bottom-up:
//!
//! - [`linalg`]: dense complex matrices, a Jacobi Hermitian eigensolver and
//!   functional calculus.
//! - [`state`]: density operators, projective decompositions of observables,
//!   seeded Ginibre/Haar sampling.
//! - [`entropy`]: relative entropy with exact support semantics, von Neumann
//!   entropy, discrete KL divergence.
//! - [`collapse`]: weak (pinching), strong (Lüders) and Jeffrey-weighted
//!   updates.
//! - [`optimize`]: blockwise entropic mirror descent over the commuting and
//!   fixed-block-trace constraint sets, plus first-order certificate checks.
//! - [`bayes`]: the classical (commuting) counterpart.
//!
//! All operations are pure; random generators are explicit seeded values.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod bayes;
pub mod collapse;
pub mod entropy;
pub mod error;
pub mod linalg;
mod math;
pub mod optimize;
pub mod state;
pub mod tol;

pub use error::{Error, Result};
pub use linalg::{commutator_norm, hermitian_eig, matrix_function, trace_distance, ComplexMatrix, EigenDecomposition, ZeroPolicy};
pub use num_complex::Complex64;
pub use state::{block_trace, random_density, random_pvm, spectral_decompose, Block, BlockProbabilities, DensityOperator, ProjectiveDecomposition};
