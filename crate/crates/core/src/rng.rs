//! Seeded random streams.
//!
//! Every stochastic routine draws from a [`ChaCha8Rng`]. Parallel work never
//! shares a generator: each worker or shard gets its own stream selected by
//! `(seed, index)`, so results depend only on the seed and the shard layout,
//! not on how shards are scheduled onto threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for the root stream of `seed`.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `index` of `seed`.
///
/// The key is derived from `seed` and the ChaCha stream id from `index`, so
/// substreams never overlap with each other or with [`seeded`].
pub fn substream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

/// SplitMix64 finalizer, used to derive child seeds from `(seed, index)`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
