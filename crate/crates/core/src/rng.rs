//! Seeded random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator (the
//! `rand_chacha` implementation, which is portable and bit-exact across
//! platforms). A stream is identified by `(seed, purpose, index)`: the key is
//! built from `seed` and `index`, and the ChaCha stream id is the purpose tag.
//! Codebook draws, statistics samples and trial draws therefore never share
//! key material even when they are given the same user seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Codebook = 1,
    DotStatistics = 2,
    Trial = 3,
    Verify = 4,
}

/// Builds the generator for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&index.to_le_bytes());
    key[16..24].copy_from_slice(&(purpose as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(purpose as u64);
    rng
}

/// SplitMix64 finalizer, used to derive child seeds (e.g. one codebook seed
/// per trial) from a parent seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Fills `out` with independent ±1 values, 64 signs per generator word.
/// A set bit maps to −1.
pub fn fill_signs<R: RngCore + ?Sized>(rng: &mut R, out: &mut [f64]) {
    const ONE: u64 = 0x3FF0_0000_0000_0000;
    for chunk in out.chunks_mut(64) {
        let bits = rng.next_u64();
        for (i, x) in chunk.iter_mut().enumerate() {
            // Bit i of the word becomes the IEEE sign bit of 1.0.
            *x = f64::from_bits(ONE | ((bits >> i) & 1) << 63);
        }
    }
}
