//! Counter-based substreams for reproducible replication.
//!
//! Each replication r of a seeded experiment draws from an independent
//! ChaCha stream selected by (seed, r). Stream selection is O(1), so any
//! parallel schedule over replications sees exactly the same draws.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG substream for replication `index` of an experiment seeded with
/// `seed`. Deterministic across platforms and thread schedules.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
