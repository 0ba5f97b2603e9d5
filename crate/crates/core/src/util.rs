//! Small shared helpers: seed derivation and content hashing.

/// SplitMix64 step, used to derive independent sub-seeds from a master seed.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a sub-seed from a master seed and a stream of labels.
///
/// Used wherever one user-facing `--seed` has to fan out into independent
/// deterministic streams (per corpus entry, per epoch, per file).
pub fn derive_seed(master: u64, labels: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &l in labels {
        s = splitmix64(s ^ l);
    }
    s
}

/// FNV-1a 64-bit hash, for content digests in cache sidecars.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
