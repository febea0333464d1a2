//! Seeded inputs shared by the criterion benchmarks.

use pdd_core::multicast::MulticastInstance;
use pdd_core::numerics::RealMatrix;
use pdd_core::relay::RelayInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> RealMatrix {
    let mut r = rng(seed);
    RealMatrix::from_fn(rows, cols, |_, _| r.random_range(-1.0..1.0))
}

/// Multicast instance at `P_BS = 10 dB`.
pub fn multicast(n_t: usize, n_g: usize, m_g: usize, seed: u64) -> MulticastInstance {
    MulticastInstance::random(n_t, n_g, m_g, 10.0, &mut rng(seed)).expect("valid multicast dimensions")
}

/// Relay instance at 10 dB SNR.
pub fn relay(n_s: usize, n_r: usize, k: usize, seed: u64) -> RelayInstance {
    RelayInstance::random(n_s, n_r, k, 10.0, &mut rng(seed)).expect("valid relay dimensions")
}
