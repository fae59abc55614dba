//! Reproducible random number streams.
//!
//! Every stochastic operation in this crate draws from ChaCha8 streams
//! derived from a caller-supplied 64-bit seed. ChaCha8 supports 2^64
//! independent streams under a single key (the stream id occupies the
//! high word of the block counter), so stream `j` is a pure function of
//! `(seed, j)` and results do not depend on which thread runs which
//! stream. Unrelated consumers of the same user seed (weight assignment,
//! cascade sampling, node shuffling) are separated by mixing a domain
//! constant into the key with SplitMix64.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const DOMAIN_SIMULATION: u64 = 0x53494d;
pub(crate) const DOMAIN_TRIVALENCY: u64 = 0x545249;
pub(crate) const DOMAIN_PARTITION: u64 = 0x504152;
pub(crate) const DOMAIN_SELECTION: u64 = 0x53454c;
pub(crate) const DOMAIN_EVALUATION: u64 = 0x4556;

/// SplitMix64 finalizer over `seed ^ golden * domain`; derives sub-seeds
/// for independent purposes from one user-facing seed.
pub fn derive_seed(seed: u64, domain: u64) -> u64 {
    let mut z = seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 generator for stream `stream` under the key expanded from `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream for Monte Carlo sample `j` of an estimation run.
pub(crate) fn sim_stream(seed: u64, sample: u64) -> ChaCha8Rng {
    stream_rng(derive_seed(seed, DOMAIN_SIMULATION), sample)
}

/// Stream for the trivalency draw of directed edge `edge`.
pub(crate) fn tv_stream(seed: u64, edge: u64) -> ChaCha8Rng {
    stream_rng(derive_seed(seed, DOMAIN_TRIVALENCY), edge)
}
