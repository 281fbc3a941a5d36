//! Seeded random streams.
//!
//! Every simulation draws from ChaCha20 keyed by `seed` (expanded through
//! `SeedableRng::seed_from_u64`) with the 64-bit stream id set to the
//! replication index. A replication therefore sees the same numbers no
//! matter which thread runs it or how many threads exist.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn replication_rng(seed: u64, replication: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

pub fn standard_normals(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}
