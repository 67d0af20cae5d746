//! Counter-derived random substreams.
//!
//! Every random draw descends from one 64-bit master seed. A substream is
//! identified by a purpose label, a term number and a counter: the label and
//! term are hashed (FNV-1a) into the ChaCha stream id, and the counter selects
//! a disjoint 2^32-word window of that stream. Results therefore do not depend
//! on which worker evaluates which counter.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, b| (h ^ u64::from(*b)).wrapping_mul(FNV_PRIME))
}

/// Stream id for a purpose label and term number.
pub fn stream_id(label: &str, term: u64) -> u64 {
    let mut bytes = label.as_bytes().to_vec();
    bytes.push(0);
    bytes.extend_from_slice(&term.to_le_bytes());
    fnv1a(&bytes)
}

/// Factory for the substreams of one (seed, label, term) triple.
#[derive(Clone)]
pub struct Streams {
    base: ChaCha8Rng,
}

impl Streams {
    pub fn new(seed: u64, label: &str, term: u64) -> Self {
        let mut base = ChaCha8Rng::seed_from_u64(seed);
        base.set_stream(stream_id(label, term));
        Self { base }
    }

    /// The generator for counter `index`.
    pub fn get(&self, index: u64) -> Rng {
        let mut r = self.base.clone();
        r.set_word_pos(u128::from(index) << 32);
        r
    }
}
