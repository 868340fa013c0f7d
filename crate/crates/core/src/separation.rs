//! Completely separated barriers and the reduction to a uniform gap.
//!
//! For barriers that are only completely separated (`L < U` and `L_- < U_-`
//! everywhere), the upper barrier is replaced by `U^n = max(U, L + 1/n)`.
//! On a grid the sequence `U^n` is stationary: once `1/n` is below the
//! separation gap, `U^n = U` exactly, so a single solve at the stationarity
//! index answers the original problem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{sup_distance, GridPath};
use crate::spr::{solve_spr_alternating, upper_perturbation_bound, SprProblem, SprSolution};

/// Separation status of a barrier pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "epsilon")]
pub enum Separation {
    /// Gap bounded below by the given `ε > 0`.
    UniformGap(f64),
    /// Strictly positive gap everywhere, no a-priori `ε`.
    CompletelySeparated,
    Touching,
}

impl Separation {
    pub fn label(&self) -> &'static str {
        match self {
            Separation::UniformGap(_) => "uniform-gap",
            Separation::CompletelySeparated => "separated",
            Separation::Touching => "touching",
        }
    }
}

/// Lower and upper barrier on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierPair {
    lower: GridPath,
    upper: GridPath,
    gap: f64,
}

impl BarrierPair {
    pub fn new(lower: GridPath, upper: GridPath) -> Result<Self> {
        let gap = separation_gap(&lower, &upper)?;
        Ok(Self { lower, upper, gap })
    }

    pub fn lower(&self) -> &GridPath {
        &self.lower
    }

    pub fn upper(&self) -> &GridPath {
        &self.upper
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn status(&self) -> Separation {
        if self.gap > 0.0 {
            Separation::CompletelySeparated
        } else {
            Separation::Touching
        }
    }

    /// Status against a prescribed uniform gap `ε`.
    pub fn status_with_epsilon(&self, epsilon: f64) -> Separation {
        if epsilon > 0.0 && self.gap >= epsilon {
            Separation::UniformGap(epsilon)
        } else {
            self.status()
        }
    }

    /// First index where `U_k - L_k <= 0`.
    pub fn first_touching(&self) -> Option<usize> {
        self.lower.values().iter().zip(self.upper.values()).position(|(l, u)| u - l <= 0.0)
    }

    /// `(max_k |L_k|, max_k |U_k|)`, the pathwise part of the barrier integrability condition.
    pub fn sup_norms(&self) -> (f64, f64) {
        (self.lower.sup_norm(), self.upper.sup_norm())
    }
}

/// `min_k (U_k - L_k)` together with the left-limit differences, which on a
/// step path are the same numbers shifted by one index.
pub fn separation_gap(lower: &GridPath, upper: &GridPath) -> Result<f64> {
    lower.ensure_same_grid(upper)?;
    let pointwise = lower.values().iter().zip(upper.values()).map(|(l, u)| u - l).fold(f64::INFINITY, f64::min);
    let left = (1..lower.len()).map(|k| upper.values()[k - 1] - lower.values()[k - 1]).fold(f64::INFINITY, f64::min);
    Ok(pointwise.min(left))
}

/// `U^n = max(U, L + 1/n)`.
pub fn approx_upper(lower: &GridPath, upper: &GridPath, n: u64) -> Result<GridPath> {
    if n == 0 {
        return Err(Error::ZeroOrder);
    }
    let shift = 1.0 / n as f64;
    upper.zip_with(lower, |u, l| u.max(l + shift))
}

/// `L^n = min(L, U - 1/n)`, the mirrored approximation acting on the lower barrier.
pub fn approx_lower(lower: &GridPath, upper: &GridPath, n: u64) -> Result<GridPath> {
    if n == 0 {
        return Err(Error::ZeroOrder);
    }
    let shift = 1.0 / n as f64;
    lower.zip_with(upper, |l, u| l.min(u - shift))
}

fn upper_is_stationary(lower: &[f64], upper: &[f64], n: u64) -> bool {
    let shift = 1.0 / n as f64;
    lower.iter().zip(upper).all(|(&l, &u)| l + shift <= u)
}

/// Smallest `n >= 1` with `U^n = U` componentwise.
///
/// Starts from `ceil(1 / gap)` and corrects by testing `L_k + 1/n <= U_k` in
/// floating point, which is the exact condition for `max(U, L + 1/n) = U`.
pub fn stationarity_index(lower: &GridPath, upper: &GridPath) -> Result<u64> {
    let gap = separation_gap(lower, upper)?;
    if gap.is_nan() || gap <= 0.0 {
        let index = lower.values().iter().zip(upper.values()).position(|(l, u)| u - l <= 0.0).unwrap_or(0);
        return Err(Error::Touching { index, gap });
    }
    let (l, u) = (lower.values(), upper.values());
    let mut n = (1.0 / gap).ceil().clamp(1.0, u64::MAX as f64) as u64;
    while n > 1 && upper_is_stationary(l, u, n - 1) {
        n -= 1;
    }
    while !upper_is_stationary(l, u, n) {
        n = n.checked_add(1).ok_or_else(|| Error::InvalidParameter("stationarity index overflow".into()))?;
    }
    Ok(n)
}

/// Solves `SPR(Y, L, U)` for completely separated barriers by solving once at the stationarity index.
pub fn solve_spr_separated(problem: &SprProblem) -> Result<SprSolution> {
    let barriers = problem.barriers();
    if let Some(index) = barriers.first_touching() {
        return Err(Error::Touching { index, gap: barriers.gap() });
    }
    let n_star = stationarity_index(barriers.lower(), barriers.upper())?;
    let upper_n = approx_upper(barriers.lower(), barriers.upper(), n_star)?;
    // Identical barriers for n* and n*+1 imply identical solutions.
    debug_assert!(upper_n == *barriers.upper());
    debug_assert!(approx_upper(barriers.lower(), barriers.upper(), n_star + 1)? == *barriers.upper());
    let approximated = problem.with_upper(upper_n)?;
    Ok(solve_spr_alternating(&approximated)?.0)
}

/// One step of the approximating sequence.
#[derive(Debug, Clone)]
pub struct ApproximationStep {
    pub n: u64,
    /// `sup_k (U^n_k - U_k)`.
    pub barrier_excess: f64,
    /// `sup_k |X^n_k - X^{n*}_k|`.
    pub distance_to_limit: f64,
    /// Largest violation of `(X^n - X^{n*})^2 <= RHS` over the grid; nonpositive when the bound holds.
    pub bound_slack: f64,
    pub solution: SprSolution,
}

/// Diagnostic mode: solves `SPR(Y, L, U^n)` for `n = 1..=n*` and checks the
/// stability bound of each approximation against the stationary solution.
/// Stops early at `max_n` when given.
pub fn approximation_sequence(problem: &SprProblem, max_n: Option<u64>) -> Result<Vec<ApproximationStep>> {
    let barriers = problem.barriers();
    let n_star = stationarity_index(barriers.lower(), barriers.upper())?;
    let limit = solve_spr_separated(problem)?;
    let last = max_n.map_or(n_star, |m| m.min(n_star));
    let mut steps = Vec::with_capacity(last as usize);
    for n in 1..=last {
        let upper_n = approx_upper(barriers.lower(), barriers.upper(), n)?;
        let barrier_excess = upper_n.sub(barriers.upper())?.max_value();
        let solution = solve_spr_alternating(&problem.with_upper(upper_n.clone())?)?.0;
        let (lhs, rhs) = upper_perturbation_bound(&limit, &solution, barriers.upper(), &upper_n)?;
        let bound_slack = lhs.values().iter().zip(rhs.values()).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
        steps.push(ApproximationStep {
            n,
            barrier_excess,
            distance_to_limit: sup_distance(solution.x(), limit.x())?,
            bound_slack,
            solution,
        });
    }
    Ok(steps)
}
