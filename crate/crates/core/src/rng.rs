//! Counter-based RNG streams.
//!
//! Every stochastic operation in this crate draws from a stream addressed by
//! `(seed, domain, index)`. Streams are mutually independent for distinct
//! addresses, so ensembles can be generated by any number of workers over
//! disjoint index ranges and merged with results identical to a serial run.

use rand_core::{RngCore, SeedableRng};
use rand_pcg::Pcg64Mcg;

/// Stream domains keep index spaces from colliding across subsystems.
pub mod domain {
    /// Per-sample path generation.
    pub const PATH_SAMPLE: u64 = 0x01;
    /// Bootstrap replicates.
    pub const BOOTSTRAP: u64 = 0x02;
    /// Node placement in a deployment.
    pub const NODE_PLACEMENT: u64 = 0x03;
    /// Source/destination pair selection and per-pair routing randomness.
    pub const ROUTE_PAIR: u64 = 0x04;
    /// Miscellaneous test streams.
    pub const TEST: u64 = 0x7f;
}

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix `(seed, tag, value)` into a fresh sub-seed, for experiments that
/// need one independent seed per configuration point.
pub fn derive_seed(seed: u64, tag: u64, value: u64) -> u64 {
    // each component is avalanche-mixed before the next is combined, so
    // nearby (seed, value) pairs cannot cancel against each other
    let mut state = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut state = splitmix64(&mut state) ^ value;
    splitmix64(&mut state)
}

/// Deterministic RNG for stream `(seed, domain, index)`.
///
/// Each address word is avalanche-mixed through SplitMix64 before the next
/// word is folded in; combining by xor alone would let nearby
/// `(seed, index)` pairs collide onto the same stream.
pub fn stream_rng(seed: u64, domain: u64, index: u64) -> Pcg64Mcg {
    let mut state = seed ^ 0x6a09_e667_f3bc_c908;
    let mut state = splitmix64(&mut state) ^ domain.wrapping_mul(0xd6e8_feb8_6659_fd93);
    let mut state = splitmix64(&mut state) ^ index;
    let lo = splitmix64(&mut state);
    let hi = splitmix64(&mut state);
    let mut bytes = [0u8; 16];
    bytes[..8].copy_from_slice(&lo.to_le_bytes());
    bytes[8..].copy_from_slice(&hi.to_le_bytes());
    Pcg64Mcg::from_seed(bytes)
}

/// Uniform draw in the half-open interval `[0, 1)` with 53-bit resolution.
#[inline]
pub fn uniform_01<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Uniform draw in the half-open interval `(0, 1]`; never returns zero,
/// so it is safe under a logarithm.
#[inline]
pub fn uniform_open01<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9007199254740992.0)
}

/// Uniform index in `[0, n)` via the widening-multiply reduction.
///
/// The residual bias is below `n / 2^64`, irrelevant at the sample counts
/// used anywhere in this crate.
#[inline]
pub fn uniform_index<R: RngCore>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}
