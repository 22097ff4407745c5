//! Keyed random substreams.
//!
//! A substream is a ChaCha8 generator whose 256-bit key is expanded from a
//! 64-bit seed and whose 64-bit stream id is the index of the consumer (a cross
//! section, a replication, a Wiener draw). ChaCha is counter based, so every
//! `(seed, index)` pair owns an independent, position-addressable stream and
//! results never depend on which worker consumed which index.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for consumer `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Derives the seed of child `index` (e.g. one replication's panel) from a master seed.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut state = master ^ 0x6A09_E667_F3BC_C908;
    let a = splitmix64(&mut state);
    let mut state = a ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    splitmix64(&mut state)
}
