//! Seeded random streams.
//!
//! Every consumer of randomness draws from its own ChaCha stream derived from
//! the run seed, so that, for example, the network trajectory does not depend
//! on how many opinions were drawn or on whether control is active.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream used to build the initial graph.
pub const GRAPH_INIT: u32 = 0;
/// Stream used to draw initial opinions.
pub const OPINION_INIT: u32 = 1;
/// Stream driving the rewiring process.
pub const NETWORK_EVOLUTION: u32 = 2;

/// Independent generator for `(seed, purpose, index)`.
pub fn stream_rng(seed: u64, purpose: u32, index: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 32) | index as u64);
    rng
}
