//! Seeding rules.
//!
//! Every random quantity comes from a ChaCha8 generator keyed by a `u64`
//! seed. Independent sub-streams of one seed use ChaCha's 64-bit stream
//! selector, so `stream_rng(s, k)` and `stream_rng(s, k')` never overlap for
//! `k != k'`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type IsingRng = ChaCha8Rng;

/// Generator for sub-stream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> IsingRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Number of distinct task tags available per replication index.
pub const TAGS_PER_INDEX: u64 = 64;

/// Derives the seed of task `(index, tag)` from a master seed.
///
/// For a fixed master seed the map is injective over `index < 2^58` and
/// `tag < 64`: the packed word is offset by a bijective hash of the master
/// seed and then passed through the bijective splitmix64 finaliser.
pub fn derive_seed(master: u64, index: u64, tag: u64) -> u64 {
    assert!(tag < TAGS_PER_INDEX, "tag {tag} out of range");
    assert!(index < (1 << 58), "index {index} out of range");
    mix64(mix64(master).wrapping_add(index * TAGS_PER_INDEX + tag))
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
