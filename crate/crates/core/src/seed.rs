//! Derivation of independent RNG stream seeds from one master seed.
//!
//! Every randomized component draws from its own stream so that replicates
//! can run concurrently and still reproduce byte-for-byte. The derivation
//! rule is fixed:
//!
//! ```text
//! stream = splitmix64(splitmix64(splitmix64(master) + replicate) ^ tag)
//! ```
//!
//! where `splitmix64` is the standard 64-bit avalanche finalizer. Tags
//! partition the streams by purpose (see [`tag`]); callers fold small
//! structural indices such as the bin count into the tag.

/// One step of the splitmix64 avalanche hash.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for stream (`replicate`, `tag`) from `master`.
pub fn stream_seed(master: u64, replicate: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master).wrapping_add(replicate)) ^ tag)
}

/// Stream tag namespace. Values are arbitrary distinct constants.
pub mod tag {
    /// Chain trajectory for a given bin count `n`.
    pub fn trajectory(n: usize) -> u64 {
        0x5452_414A_0000_0000 ^ n as u64
    }

    /// Restart stream of the heuristic cut-norm solver at bin count `n`.
    pub fn cut_heuristic(n: usize) -> u64 {
        0x4355_5448_0000_0000 ^ n as u64
    }

    /// Fractional rectangle sampling.
    pub const FRACTIONAL: u64 = 0x4652_4143_0000_0000;
}
