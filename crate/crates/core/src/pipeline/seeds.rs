//! Deterministic seed derivation from the single top-level seed.

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `seed` with a path of labels into an independent sub-seed.
pub fn derive_seed(seed: u64, labels: &[&str]) -> u64 {
    let mut h = FNV_OFFSET ^ splitmix64(seed);
    for label in labels {
        for b in label.bytes().chain(std::iter::once(0xff)) {
            h ^= b as u64;
            h = h.wrapping_mul(FNV_PRIME);
        }
    }
    splitmix64(h)
}
