//! Counter-addressed random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream addressed by
//! `(master_seed, stream_index)`. The key is derived from the master seed and
//! the 64-bit ChaCha stream id carries the index, so a stream is a pure
//! function of its address and can be materialized on any thread.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Bits of the stream index reserved for the trial counter in
/// [`RngStream::trial`].
pub const TRIAL_BITS: u32 = 40;

/// Largest base index that can still address trial substreams.
pub const MAX_BASE_INDEX: u64 = (1 << (64 - TRIAL_BITS)) - 1;

/// Address of an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Substream owned by trial `trial` of this base stream.
    ///
    /// Distinct `(base, trial)` pairs map to distinct stream ids as long as
    /// `base <= MAX_BASE_INDEX` and `trial < 2^40`.
    pub fn trial(&self, trial: u64) -> RngStream {
        debug_assert!(self.stream_index <= MAX_BASE_INDEX, "base index too large");
        debug_assert!(trial < (1 << TRIAL_BITS), "trial index too large");
        RngStream {
            master_seed: self.master_seed,
            stream_index: (self.stream_index << TRIAL_BITS) | trial,
        }
    }

    /// Materializes the generator at word position zero.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}
