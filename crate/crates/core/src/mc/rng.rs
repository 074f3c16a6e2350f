use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator behind every simulated path.
pub type StreamRng = ChaCha8Rng;

/// Independent, reproducible stream `stream` of the generator seeded by `seed`.
///
/// ChaCha is counter based: the stream id selects a disjoint keystream, so the
/// draws depend only on `(seed, stream)`, never on thread or platform.
pub fn rng_substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
