//! Deterministic random streams.
//!
//! Every consumer of randomness gets its own stream derived from the master
//! seed and a (domain, key, key) triple, so results never depend on the order
//! in which streams are consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Spawn = 1,
    Motion = 2,
    Chain = 3,
    Duty = 4,
    Rollout = 5,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for `domain` keyed by `a` and `b` under `master`.
pub fn stream(master: u64, domain: Domain, a: u64, b: u64) -> SimRng {
    let mut state = master;
    for word in [domain as u64, a, b] {
        state = splitmix64(&mut state) ^ word;
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    SimRng::from_seed(seed)
}
