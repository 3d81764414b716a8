// SPDX-License-Identifier: Apache-2.0

//! Deterministic seed derivation.
//!
//! Every random stream in the pipeline is a ChaCha8 generator whose seed is
//! derived from the master seed, a role label and a list of indices. Streams
//! for different roles or indices are independent of each other, so work can
//! be scheduled in any order without changing results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `master`, `role` and `indices` into a 64-bit seed.
pub fn derive_seed(master: u64, role: &str, indices: &[u64]) -> u64 {
    // FNV-1a over the role label
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in role.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01B3);
    }
    let mut state = splitmix64(master ^ splitmix64(h));
    for &i in indices {
        state = splitmix64(state ^ splitmix64(i.wrapping_add(0x51_7CC1_B727_220A)));
    }
    state
}

pub fn rng_from_seed(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

/// Shorthand for `rng_from_seed(derive_seed(master, role, indices))`.
pub fn derive_rng(master: u64, role: &str, indices: &[u64]) -> Rng {
    rng_from_seed(derive_seed(master, role, indices))
}
