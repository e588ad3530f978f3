//! Seeded random streams.
//!
//! Every randomized computation derives its generator from `(seed, index)`,
//! so draw `i` is the same whether the work runs on one thread or many.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent ChaCha stream number `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
