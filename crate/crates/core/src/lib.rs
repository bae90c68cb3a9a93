//! Classification of trace-preserving qubit channels.
//!
//! Channels are represented by their 4×4 Pauli transfer matrix in the
//! `{I, σ₁, σ₂, σ₃}` basis. The crate decides complete positivity and
//! entanglement breaking by several independent routes (Choi spectrum,
//! contraction matrix, sign changes, partial transpose), builds Holevo
//! measure-and-prepare ensembles, decomposes entanglement-breaking channels
//! into classical-quantum channels, and generates the parameter-plane
//! datasets used to visualise the complete-positivity region.

pub mod canonical;
pub mod channel;
pub mod classify;
pub mod cp;
pub mod decompose;
pub mod ebt;
mod error;
pub mod holevo;
pub mod io;
pub mod nnls;
pub mod pauli;
pub mod polytope;
pub mod region;
pub mod sampling;
pub mod selftest;

mod par;

pub use canonical::{singular_values_3x3, to_canonical, CanonicalForm};
pub use channel::{channel_from_canonical, BlochVector, ChoiMatrix, DensityOperator, PauliTransferMatrix};

pub use cp::{choi_psd, contraction_matrix, cp_via_contraction, CpVerdict};
pub use decompose::{decompose_constructive, decompose_numeric, CqChannel, CqDecomposition};
pub use ebt::{ebt_choi_bound, ebt_ppt, ebt_region_intersection, ebt_sign_change, EbtVerdict};
pub use error::{Error, Result};
pub use classify::{classify, Classification};
pub use holevo::{build_cq, build_qc, ensemble_to_transfer, verify_ensemble, HolevoEnsemble};

/// Default tolerance for eigenvalue and PSD decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance for treating a canonical `λ_k` as zero.
pub const ZERO_LAMBDA_TOL: f64 = 1e-10;

pub type C64 = nalgebra::Complex<f64>;
