//! Counter-based random substreams.
//!
//! Every stochastic unit of work (a shot, a trajectory) owns a ChaCha stream
//! derived from the master seed and its integer coordinates, so results do
//! not depend on scheduling or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for the unit of work identified by `key` under `seed`.
pub fn substream(seed: u64, key: &[u64]) -> SimRng {
    let mut h = 0x6A09_E667_F3BC_C908u64;
    for &k in key {
        h = splitmix64(h ^ k);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(h);
    rng
}

/// Domain tags so different experiment stages never share a stream.
pub mod tag {
    pub const SHOT: u64 = 1;
    pub const TRAJECTORY: u64 = 2;
    pub const CALIBRATION: u64 = 3;
    pub const LOCKING: u64 = 4;
    pub const MONTE_CARLO: u64 = 5;
}
