//! Seeded random streams. Every randomized operation draws from a ChaCha8
//! generator keyed by the caller's seed and a purpose-specific stream id, so
//! distinct purposes never share a sequence even when they share a seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Purpose {
    /// Layout attempt `n` uses stream `n`; attempt 0 is the plain placement.
    Layout(u32),
    Flows,
    Selection,
    Boresight,
}

impl Purpose {
    fn stream(self) -> u64 {
        match self {
            Purpose::Layout(attempt) => attempt as u64,
            Purpose::Flows => 1 << 40,
            Purpose::Selection => 2 << 40,
            Purpose::Boresight => 3 << 40,
        }
    }
}

pub(crate) fn stream(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose.stream());
    rng
}
