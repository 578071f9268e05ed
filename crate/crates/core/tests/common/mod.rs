//! Shared generators for integration tests: seeded random scenarios over
//! small dimensions.

use stot::distributions::TpsmScenario;
use stot::random::{random_channel, random_pvm, random_state};

/// splitmix64 step, for deriving independent sub-seeds.
pub fn mix(seed: u64, stream: u64) -> u64 {
    let mut x = seed ^ stream.wrapping_mul(0x9e3779b97f4a7c15);
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Deterministic random scenario with dims in {2, 3, 4}, mixed state ranks,
/// mixed Kraus ranks, and mixed outcome counts.
pub fn random_scenario(seed: u64) -> TpsmScenario {
    let dim_a = 2 + (mix(seed, 1) % 3) as usize;
    let dim_b = 2 + (mix(seed, 2) % 3) as usize;
    let rank = 1 + (mix(seed, 3) as usize) % dim_a;
    let min_kraus = dim_a.div_ceil(dim_b);
    let kraus_rank = min_kraus + (mix(seed, 4) as usize) % 3;
    let outcomes_a = 2 + (mix(seed, 5) as usize) % (dim_a - 1);
    let outcomes_b = 2 + (mix(seed, 6) as usize) % (dim_b - 1);
    TpsmScenario::new(
        random_state(dim_a, rank, mix(seed, 7)).unwrap(),
        random_pvm(dim_a, outcomes_a, mix(seed, 8)).unwrap(),
        random_channel(dim_a, dim_b, kraus_rank, mix(seed, 9)).unwrap(),
        random_pvm(dim_b, outcomes_b, mix(seed, 10)).unwrap(),
    )
    .unwrap()
}
