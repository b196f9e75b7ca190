//! Seed derivation. Every unit of randomised work (one sub-sample, one
//! replication, one chunk of draws) gets its own generator derived from a
//! base seed and its index, so results never depend on scheduling.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

pub type StreamRng = Pcg64Mcg;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `index` under `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(GOLDEN))
}

/// The generator owned by work item `index`.
pub fn stream(seed: u64, index: u64) -> StreamRng {
    let hi = derive_seed(seed, index);
    let lo = splitmix64(hi ^ 0xD1B5_4A32_D192_ED03);
    let state = ((hi as u128) << 64) | lo as u128;
    Pcg64Mcg::new(state | 1)
}

/// A generator seeded directly, for single-stream work such as data generation.
pub fn seeded(seed: u64) -> StreamRng {
    StreamRng::seed_from_u64(seed)
}

/// Tags separating the seed spaces of different consumers of one user seed.
pub mod tags {
    pub const DATA: u64 = 0x01;
    pub const SUBSAMPLE: u64 = 0x02;
    pub const TIES: u64 = 0x03;
    pub const CALIBRATION: u64 = 0x10;
    pub const POWER: u64 = 0x11;
    pub const MOMENT: u64 = 0x12;
    pub const CONVERGENCE: u64 = 0x13;
    pub const SMOOTH_SAMPLE: u64 = 0x20;
}
