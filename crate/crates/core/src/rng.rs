//! Reproducible random source.
//!
//! Every draw goes through [`Prng`], a ChaCha8 stream keyed by a 64-bit seed
//! (`rand_chacha::ChaCha8Rng::seed_from_u64`). ChaCha output is defined
//! independently of platform word size and endianness, and all bounded draws
//! are taken over `u64` so that `usize` width never leaks into the stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Prng {
    inner: ChaCha8Rng,
}

impl Prng {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform index in `0..len`. `len` must be non-zero.
    #[inline]
    pub fn index(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        self.inner.gen_range(0..len as u64) as usize
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.gen()
    }
}
