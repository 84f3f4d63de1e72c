//! Low-rank tensor completion by ADMM.
//!
//! The library recovers a low-rank tensor from noisy, partially observed
//! entries by minimizing a weighted tensor Schatten-p norm subject to an
//! l2-ball constraint on the observed entries, and also ships a
//! rank-constrained least-squares baseline. Supporting pieces: a dense
//! N-way tensor type with mode unfoldings, the singular-value shrinkage
//! operators the solvers are built from, the weight-scheme constructions,
//! and a reproducible synthetic-instance generator.

pub mod error;
pub mod io;
pub mod solver;
pub mod spectral;
pub mod synth;
pub mod tensor;
pub mod weighting;

pub use error::{Result, TenrecError};
pub use tensor::{DenseMatrix, DenseTensor, ObservationMask};
