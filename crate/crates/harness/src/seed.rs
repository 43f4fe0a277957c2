//! Stable seed derivation.
//!
//! `hash64` runs 64-bit FNV-1a over the parts, each prefixed by its length so
//! that `("ab", "c")` and `("a", "bc")` differ, then mixes the result with the
//! splitmix64 finalizer. The function is fixed: changing it changes every
//! published result.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn hash64(parts: &[&[u8]]) -> u64 {
    let mut h = FNV_OFFSET;
    for part in parts {
        h = fnv1a(h, &(part.len() as u64).to_le_bytes());
        h = fnv1a(h, part);
    }
    splitmix64(h)
}

/// Seed of one run.
pub fn run_seed(master_seed: u64, problem: &str, algorithm: &str, mode: &str, run_index: usize) -> u64 {
    hash64(&[
        &master_seed.to_le_bytes(),
        problem.as_bytes(),
        algorithm.as_bytes(),
        mode.as_bytes(),
        &(run_index as u64).to_le_bytes(),
    ])
}

/// Seed of a problem instance (shift and rotation), shared by every algorithm
/// and run on that problem.
pub fn instance_seed(master_seed: u64, problem: &str, dim: usize) -> u64 {
    hash64(&[
        b"instance",
        &master_seed.to_le_bytes(),
        problem.as_bytes(),
        &(dim as u64).to_le_bytes(),
    ])
}
