//! Seeded random instances for fuzzing the reflection solvers.

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::path::{GridPath, TimeGrid, DEFAULT_TOL};
use crate::spr::SprProblem;

/// Parameters of a random instance: a random-walk driver, a random-walk lower
/// barrier and an upper barrier at a random positive distance above it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorSpec {
    pub steps: usize,
    pub horizon: f64,
    pub gap_min: f64,
    pub gap_max: f64,
    /// Total variation of the driver `Y`.
    pub driver_variation: f64,
    /// Total variation of the lower barrier.
    pub barrier_variation: f64,
    /// Reject gap ranges that could produce touching barriers.
    pub require_separated: bool,
    pub tol: f64,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        Self {
            steps: 200,
            horizon: 1.0,
            gap_min: 0.05,
            gap_max: 1.0,
            driver_variation: 20.0,
            barrier_variation: 2.0,
            require_separated: true,
            tol: DEFAULT_TOL,
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.steps == 0 {
            return bad("steps must be at least 1".into());
        }
        let finite =
            [self.horizon, self.gap_min, self.gap_max, self.driver_variation, self.barrier_variation, self.tol];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("generator parameters must be finite".into());
        }
        if self.gap_min < 0.0 || self.gap_min > self.gap_max {
            return bad(format!("gap range [{}, {}] is empty or negative", self.gap_min, self.gap_max));
        }
        if self.require_separated && self.gap_min <= 0.0 {
            return bad("separated barriers need gap_min > 0".into());
        }
        if self.driver_variation < 0.0 || self.barrier_variation < 0.0 {
            return bad("variation budgets must be nonnegative".into());
        }
        Ok(())
    }
}

// Gaussian increments rescaled to the exact variation budget.
fn walk(rng: &mut ChaCha8Rng, start: f64, steps: usize, variation: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..steps).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let total: f64 = raw.iter().map(|v| v.abs()).sum();
    let scale = if total > 0.0 { variation / total } else { 0.0 };
    let mut out = Vec::with_capacity(steps + 1);
    let mut acc = start;
    out.push(acc);
    for r in raw {
        acc += r * scale;
        out.push(acc);
    }
    out
}

/// Deterministic instance for `seed`. Guarantees `L_0 <= Y_0 <= U_0` and, when
/// `require_separated` is set, `separation_gap >= gap_min`.
pub fn generate_instance(seed: u64, spec: &GeneratorSpec) -> Result<SprProblem> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = Arc::new(TimeGrid::uniform(spec.horizon, spec.steps)?);
    let n = spec.steps + 1;

    let l0 = rng.random_range(-1.0..1.0);
    let lower = walk(&mut rng, l0, spec.steps, spec.barrier_variation);
    let mut gaps: Vec<f64> = (0..n).map(|_| rng.random_range(spec.gap_min..=spec.gap_max)).collect();
    if !spec.require_separated {
        let k = rng.random_range(0..n);
        gaps[k] = spec.gap_min;
    }
    let upper: Vec<f64> = lower
        .iter()
        .zip(&gaps)
        .map(|(&l, &g)| {
            let mut u = l + g;
            while u - l < g {
                u = u.next_up();
            }
            u
        })
        .collect();

    let y0 = (lower[0] + rng.random::<f64>() * (upper[0] - lower[0])).clamp(lower[0], upper[0]);
    let y = walk(&mut rng, y0, spec.steps, spec.driver_variation);

    SprProblem::new(
        GridPath::new(grid.clone(), y)?,
        GridPath::new(grid.clone(), lower)?,
        GridPath::new(grid, upper)?,
        spec.tol,
    )
}

/// Applies `f` to the instance of every seed in `seeds`, in seed order.
pub fn sweep<T, F>(seeds: Range<u64>, spec: &GeneratorSpec, execution: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, SprProblem) -> T + Sync + Send,
{
    spec.validate()?;
    let start = seeds.start;
    let count = seeds.end.saturating_sub(seeds.start) as usize;
    map_indexed(count, execution, |i| {
        let seed = start + i as u64;
        generate_instance(seed, spec).map(|p| f(seed, p))
    })
    .into_iter()
    .collect()
}
