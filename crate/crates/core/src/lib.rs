//! Sparse Tucker + Givens codec for MU-MIMO beamforming weight tensors.
//!
//! Stage 1 approximates a weight tensor `V` as `S + [[G; U1, U2, U3]]` with a
//! sparse core `G`, semi-orthogonal factors `U_i` and a sparse residual `S`,
//! solved by accelerated proximal block coordinate descent
//! ([`solver::apbcd_solve`]). Stage 2 parameterizes each factor by complex
//! Givens angles ([`givens`]), quantizes everything and packs a
//! self-describing bitstream ([`codec`]). [`eval`] generates synthetic
//! channels, zero-forcing weights and sum-rate metrics.

pub mod codec;
pub mod error;
pub mod eval;
pub mod givens;
pub mod linalg;
pub mod rng;
pub mod solver;
pub mod tensor;
pub mod tucker;

pub use error::{Error, Result};
pub use linalg::{CMatrix, FactorMatrix, C64};
pub use tensor::{relative_error, ComplexTensor3};
pub use solver::{apbcd_solve, DescentTrace, SparseTucker, StdConfig};
pub use tucker::{hosvd, tucker_reconstruct, Tucker};
