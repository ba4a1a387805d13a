//! Splittable, counter-based random streams.
//!
//! Every stochastic operation takes an explicit stream: a [`StreamKey`] names
//! a `(seed, stream id)` pair and materializes a `ChaCha8Rng` positioned at
//! the start of that stream. Child keys are derived by mixing a label into
//! the stream id, so parallel replicates draw from disjoint streams and the
//! result of a run does not depend on how work is scheduled.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A deterministic stream address: global seed plus a derived stream id.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    seed: u64,
    stream: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    /// Root key for a run.
    pub fn new(seed: u64) -> Self {
        StreamKey { seed, stream: 0 }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive a child stream. Identical `(seed, path of labels)` always
    /// yields the identical stream; distinct paths yield distinct streams.
    pub fn child(&self, label: u64) -> Self {
        StreamKey {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(label)),
        }
    }

    /// Instantiate the generator for this stream, positioned at draw 0.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}
