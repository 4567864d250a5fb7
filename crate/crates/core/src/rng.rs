//! Reproducible random streams keyed by (seed, replication, sequence label).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent sequences drawn for one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Gamma = 1,
    Exp = 2,
    Unif = 3,
    V = 4,
    Times = 5,
    Remainder = 6,
    Sign = 7,
    Bootstrap = 8,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// ChaCha8 generator whose key depends on (seed, rep) and whose stream id is the label.
pub fn stream_rng(seed: u64, rep: u64, stream: Stream) -> ChaCha8Rng {
    let mut state = seed;
    let mixed = splitmix64(&mut state) ^ rep.wrapping_mul(0xd1b5_4a32_d192_ed03);
    let mut state = mixed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream as u64);
    rng
}
