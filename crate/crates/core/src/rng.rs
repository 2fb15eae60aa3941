//! Counter-based random streams.
//!
//! Every replica draws from its own ChaCha8 stream keyed by `(seed, n)` with
//! the replica index as stream id, so a draw depends only on
//! `(seed, n, replica)` and never on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for replica `replica` of sample size `n`.
pub fn replica_rng(seed: u64, n: u64, replica: u64) -> ChaCha8Rng {
    let mut state = seed ^ n.rotate_left(32).wrapping_mul(0xd6e8_feb8_6659_fd93);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(replica);
    rng
}

/// Independent child seed for a named purpose.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut state = seed ^ tag.wrapping_mul(0xa076_1d64_78bd_642f);
    splitmix64(&mut state)
}
