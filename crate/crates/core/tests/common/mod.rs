#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vaxgame::{EpidemicState, ModelParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameters spread around the standard values, all valid.
pub fn random_params(rng: &mut impl Rng) -> ModelParams {
    ModelParams::new(
        rng.gen_range(0.1..1.5),
        rng.gen_range(0.05..0.5),
        rng.gen_range(0.0..0.05),
        rng.gen_range(0.0..=1.0),
        rng.gen_range(0.1..2.0),
        rng.gen_range(0.1..2.0),
        rng.gen_range(0.0..0.5),
        rng.gen_range(0.05..1.0),
        rng.gen_range(0.0..0.2),
    )
    .unwrap()
}

/// A point on the simplex with some infection and a rate in `[0, 1]`.
pub fn random_state(rng: &mut impl Rng) -> EpidemicState {
    let w: [f64; 4] = [
        rng.gen_range(0.2..1.0),
        rng.gen_range(0.0..0.5),
        rng.gen_range(0.001..0.1),
        rng.gen_range(0.0..0.5),
    ];
    let total: f64 = w.iter().sum();
    let (s, v, i) = (w[0] / total, w[1] / total, w[2] / total);
    EpidemicState {
        s,
        v,
        i,
        r: 1.0 - s - v - i,
        rate: rng.gen_range(0.0..=1.0),
    }
}
