//! Seed plumbing. Every random stream in a run derives from the single run
//! seed through a named sub-seed, so adding a new consumer never perturbs
//! the existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn sub_seed(seed: u64, name: &str) -> u64 {
    name.bytes()
        .fold(splitmix(seed), |acc, b| splitmix(acc ^ u64::from(b)))
}

pub fn named_rng(seed: u64, name: &str) -> Rng {
    Rng::seed_from_u64(sub_seed(seed, name))
}
