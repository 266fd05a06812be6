//! Counter-based seed derivation.
//!
//! Parallel work items (simulation trials, bootstrap resamples) each get
//! `derive_seed(master, index)`, the splitmix64 output function applied to
//! the master seed advanced by `index + 1` increments of the splitmix
//! constant. The mapping depends only on `(master, index)`, so parallel and
//! sequential schedules agree and any item can be reproduced in isolation.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 output function.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th work item under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(master.wrapping_add(GAMMA.wrapping_mul(index.wrapping_add(1))))
}
