use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random stream for instance `index` under a master seed.
///
/// Every instance gets its own ChaCha stream, so the result of an instance
/// does not depend on which worker ran it or in which order.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
