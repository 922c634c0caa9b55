use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Purpose label for a random stream. Each purpose gets its own ChaCha
/// stream so draws on one never shift another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamId {
    Delay = 1,
    Mobility = 2,
    Faults = 3,
    Backoff = 4,
    Placement = 5,
    Battery = 6,
}

impl StreamId {
    pub const ALL: [StreamId; 6] = [
        StreamId::Delay,
        StreamId::Mobility,
        StreamId::Faults,
        StreamId::Backoff,
        StreamId::Placement,
        StreamId::Battery,
    ];
}

/// Returns a fresh generator for `(seed, stream)`.
pub fn stream(seed: u64, id: StreamId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

/// One generator per purpose, all derived from a single scenario seed.
#[derive(Clone, Debug)]
pub struct RngStreams {
    pub seed: u64,
    pub delay: ChaCha8Rng,
    pub mobility: ChaCha8Rng,
    pub faults: ChaCha8Rng,
    pub backoff: ChaCha8Rng,
    pub placement: ChaCha8Rng,
    pub battery: ChaCha8Rng,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        RngStreams {
            seed,
            delay: stream(seed, StreamId::Delay),
            mobility: stream(seed, StreamId::Mobility),
            faults: stream(seed, StreamId::Faults),
            backoff: stream(seed, StreamId::Backoff),
            placement: stream(seed, StreamId::Placement),
            battery: stream(seed, StreamId::Battery),
        }
    }
}
