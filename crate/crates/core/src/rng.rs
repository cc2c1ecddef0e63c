//! Independent random streams derived from one replicate seed.
//!
//! Protocols compared under the same seed see the same topology, workload
//! and per-node waypoints (common random numbers), so differences between
//! them come from cluster-head election alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Topology,
    Heterogeneity,
    Workload,
    MobileSubset,
    Election,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Topology => 1,
            Stream::Heterogeneity => 2,
            Stream::Workload => 3,
            Stream::MobileSubset => 4,
            Stream::Election => 5,
        }
    }
}

const NODE_STREAM_BASE: u64 = 1 << 32;

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

/// Waypoint stream of one node.
pub fn node_rng(seed: u64, node: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(NODE_STREAM_BASE + node as u64);
    rng
}

/// SplitMix64 finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the clustering search in round `round`.
pub fn search_seed(seed: u64, offset: u64, round: u64) -> u64 {
    mix(mix(seed ^ 0x5EED) ^ round) ^ offset
}
