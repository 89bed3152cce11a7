//! Seedable, splittable random streams.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Deterministic random stream backed by ChaCha20.
///
/// Streams derived with [`RngStream::substream`] share the key of their
/// parent but use a different ChaCha stream id, so they never overlap.
#[derive(Clone, Debug)]
pub struct RngStream {
    inner: ChaCha20Rng,
    seed: u64,
}

impl RngStream {
    pub fn seeded(seed: u64) -> Self {
        Self {
            inner: ChaCha20Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent stream `id` of the same seed, starting from the beginning.
    pub fn substream(&self, id: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(self.seed);
        inner.set_stream(id.wrapping_add(1));
        Self { inner, seed: self.seed }
    }

    /// A seed for an independent run labelled `id`, e.g. one grid cell.
    pub fn derive_seed(&self, id: u64) -> u64 {
        self.substream(id).inner.next_u64()
    }

    /// Fork a child stream keyed by a value drawn from `self`.
    pub fn split(&mut self) -> Self {
        let child = self.inner.next_u64();
        Self::seeded(child)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
