//! Counter-based random streams.
//!
//! Every stochastic per-sample decision draws from a stream keyed by
//! `(seed, epoch, sample index)`, so results do not depend on the order or
//! thread on which samples are processed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Distinguishes the purposes a seed is used for.
#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub enum Purpose {
    Init = 1,
    Shuffle = 2,
    Augment = 3,
    Dropout = 4,
    Frames = 5,
    Preview = 6,
    Synthetic = 7,
}

pub fn stream(seed: u64, purpose: Purpose, epoch: u64, index: u64) -> ChaCha8Rng {
    let key = seed
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add((purpose as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream((epoch << 32) ^ index);
    rng
}
