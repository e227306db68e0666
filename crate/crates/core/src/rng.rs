//! Seeded random sub-streams.
//!
//! Every random draw in a run comes from one experiment seed split into named
//! streams, so adding draws to one stream never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Episode reset seeds.
    Env,
    /// Network initialization.
    Init,
    /// Action selection noise.
    Exploration,
    /// Replay sampling and target-policy smoothing noise.
    Sampling,
    /// Fresh environments for evaluation.
    Eval,
    /// Probes and diagnostics.
    Probe,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Env => 1,
            Stream::Init => 2,
            Stream::Exploration => 3,
            Stream::Sampling => 4,
            Stream::Eval => 5,
            Stream::Probe => 6,
        }
    }
}

/// Deterministic generator for `stream` under experiment `seed`.
pub fn stream(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// SplitMix64 finalizer; used to derive per-episode seeds from a counter.
pub fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
