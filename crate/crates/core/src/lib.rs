//! Finite-size model of a Stern-Gerlach measurement.
//!
//! The apparatus is a chain of `2k+1` atoms, each carrying a one-dimensional
//! Gaussian wave packet that is rigidly translated by `±λt` depending on the
//! spin branch. Every quantity of interest (branch overlaps, trace-norm
//! distances, the reduced spin density matrix, center-of-mass pointer values
//! and entropies of the effective spin-chain model) has a closed form at finite
//! `k`; this crate evaluates those forms, works out their `k → ∞` limits
//! analytically, and checks each one against an independent grid-quadrature
//! oracle.
//!
//! Overlaps of order `exp(-10^8)` are routine here, so every overlap is carried
//! as a [`LogOverlap`] and only exponentiated at the very end.
//!
//! Units are left to the caller: only the ratios `λt/σ₀` and `ρσ₀` enter the
//! formulas, so any consistent unit system works.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod gaussian_model;
pub mod oracle;
pub mod pointer;
pub mod spin_entropy;
pub mod state_metrics;

pub use error::{Error, Result};
pub use gaussian_model::{
    branch_overlap, decoherence_time, evolve, initial_state, per_site_log_overlap, per_site_overlap, BranchState,
    GaussianPacket, LogOverlap, SgConfig, Spin,
};
pub use pointer::{cm_characteristic, cm_mean, magnetization_pointer, spin_readout, PointerReading};
pub use spin_entropy::{von_neumann_entropy, DensityMatrix, EntropyLedger, SpinChainMixture};
pub use state_metrics::{collapse, norm_distance, reduced_spin_density, ReducedSpinMatrix};
