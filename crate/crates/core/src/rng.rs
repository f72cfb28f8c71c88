//! Deterministic random substreams.
//!
//! A substream is a ChaCha8 generator keyed by `(seed, lane)` and positioned on
//! stream `index`, so replication `i` of an experiment sees the same numbers no
//! matter which worker runs it or on which platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Lane for PNS draws.
pub const LANE_PNS: u64 = 0;
/// Lane for the SRS baseline draws.
pub const LANE_SRS: u64 = 1;
/// Lane for fixture generation.
pub const LANE_FIXTURE: u64 = 2;

pub type SimRng = ChaCha8Rng;

pub fn substream(seed: u64, lane: u64, index: u64) -> SimRng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&lane.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
