//! Counter-based random streams.
//!
//! Every random quantity in an experiment is drawn from a ChaCha8 stream keyed
//! by `(master_seed, lane)` with the replica index as the ChaCha stream id. The
//! block counter inside ChaCha is the draw counter, so a replica's draws never
//! depend on which thread produced them or in which order replicas ran.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Independent purposes within one replica.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lane {
    Coefficients,
    LimitPath,
    Auxiliary(u32),
}

impl Lane {
    fn tag(self) -> u64 {
        match self {
            Lane::Coefficients => 0x636f_6566_6669_6373,
            Lane::LimitPath => 0x6c69_6d69_7470_6174,
            Lane::Auxiliary(k) => 0x6175_7800_0000_0000 | k as u64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamKey {
    pub master_seed: u64,
    pub replica: u64,
    pub lane: Lane,
}

impl StreamKey {
    pub fn new(master_seed: u64, replica: u64, lane: Lane) -> Self {
        Self {
            master_seed,
            replica,
            lane,
        }
    }

    /// A fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut state = self.master_seed ^ self.lane.tag();
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.replica);
        rng
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
