//! Deterministic seed derivation and the jump-threshold stream.
//!
//! All randomness in the crate flows from 64-bit seeds through the stateless
//! mixer below, so every trajectory, pair, and sweep cell owns an isolated
//! stream that depends only on (seed, index) and never on execution order.
//!
//! The derivation is fixed bit-exactly:
//!
//! ```text
//! mix64(x):  z = x + 0x9E3779B97F4A7C15               (wrapping)
//!            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 (wrapping)
//!            z = (z ^ (z >> 27)) * 0x94D049BB133111EB (wrapping)
//!            return z ^ (z >> 31)
//!
//! derive(seed, tag) = mix64(seed ^ mix64(tag))
//! ```
//!
//! `mix64` is the SplitMix64 finalizer; its output passes through every bit
//! of the input, so distinct tags yield statistically independent streams.

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and an integer tag.
#[inline]
pub fn derive(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag))
}

/// Map a `u64` to the open-closed unit interval (0, 1].
///
/// Uses the top 53 bits, shifted into (0, 1] so a threshold of exactly zero
/// (which would suppress jumps forever) cannot occur.
#[inline]
pub fn unit_open_closed(u: u64) -> f64 {
    ((u >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0) // 2^-53
}

/// Counter-indexed stream of uniform jump thresholds on (0, 1].
///
/// The i-th threshold is a pure function of (seed, i). A fiducial/auxiliary
/// trajectory pair shares one stream and each member indexes it by its own
/// jump count, so both consume identical thresholds in identical order even
/// when their jump instants drift apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThresholdStream {
    seed: u64,
}

impl ThresholdStream {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Threshold for the `index`-th jump, in (0, 1].
    #[inline]
    pub fn threshold(&self, index: u64) -> f64 {
        unit_open_closed(derive(self.seed, index))
    }
}
