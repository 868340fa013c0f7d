use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::path::{GridPath, TimeGrid};

/// Brownian path on `grid` from stream 0 of `seed`.
pub fn sample_brownian(grid: &Arc<TimeGrid>, seed: u64) -> GridPath {
    sample_brownian_stream(grid, seed, 0)
}

/// Brownian path from an independent ChaCha stream; Monte Carlo path `i` uses stream `i`.
pub fn sample_brownian_stream(grid: &Arc<TimeGrid>, seed: u64, stream: u64) -> GridPath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut b = 0.0;
    let mut values = Vec::with_capacity(grid.len());
    values.push(b);
    for k in 1..grid.len() {
        let z: f64 = rng.sample(StandardNormal);
        b += grid.step(k).sqrt() * z;
        values.push(b);
    }
    GridPath::new(grid.clone(), values).expect("gaussian increments are finite")
}
