//! Named deterministic random streams.
//!
//! Every consumer derives its own ChaCha8 stream from the run seed and a
//! stable name: the 32-byte key is `sha256(seed_le_bytes || name)`. Adding a
//! new consumer never perturbs existing streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::linalg::{CMatrix, C64};

pub fn named_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Circularly symmetric complex Gaussian with unit variance.
pub fn complex_normal(rng: &mut impl rand::Rng) -> C64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

pub fn gaussian_matrix(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}
