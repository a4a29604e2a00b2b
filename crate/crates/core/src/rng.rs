//! Seed splitting.
//!
//! Every Monte Carlo draw `i` under master seed `s` uses its own generator:
//! `ChaCha8Rng::seed_from_u64(s)` switched to stream `i`. Draws therefore do
//! not depend on how work is scheduled, and serial and parallel runs agree
//! bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

pub fn stream_rng(master_seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
