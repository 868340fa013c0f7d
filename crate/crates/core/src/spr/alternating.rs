//! Two-sided reflection built by alternating the one-sided maps.
//!
//! Each phase applies one one-sided reflection to the current iterate,
//! starting at the time the iterate reaches that barrier and freezing its
//! compensator at the first time the reflected path reaches the opposite
//! barrier. The next phase starts from there with the other barrier. With a
//! positive gap every phase advances the start index, so the number of
//! phases is bounded by the number of grid points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::{BoundedVariationPath, GridPath};

use super::{SprProblem, SprSolution};

/// `φ_k = max(0, max_{j<=k}(L_j - Y_j))`, `X = Y + φ`.
pub fn one_sided_reflect_lower(y: &GridPath, lower: &GridPath) -> Result<(GridPath, GridPath)> {
    y.ensure_same_grid(lower)?;
    let mut running = 0.0f64;
    let phi: Vec<f64> = y
        .values()
        .iter()
        .zip(lower.values())
        .map(|(y, l)| {
            running = running.max(l - y);
            running
        })
        .collect();
    let phi = GridPath::new(y.grid().clone(), phi)?;
    Ok((y.add(&phi)?, phi))
}

/// `ψ_k = max(0, max_{j<=k}(Y_j - U_j))`, `X = Y - ψ`.
pub fn one_sided_reflect_upper(y: &GridPath, upper: &GridPath) -> Result<(GridPath, GridPath)> {
    y.ensure_same_grid(upper)?;
    let mut running = 0.0f64;
    let psi: Vec<f64> = y
        .values()
        .iter()
        .zip(upper.values())
        .map(|(y, u)| {
            running = running.max(y - u);
            running
        })
        .collect();
    let psi = GridPath::new(y.grid().clone(), psi)?;
    Ok((y.sub(&psi)?, psi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    fn flip(self) -> Side {
        match self {
            Side::Lower => Side::Upper,
            Side::Upper => Side::Lower,
        }
    }
}

/// One one-sided reflection phase.
#[derive(Debug, Clone)]
pub struct Phase {
    pub side: Side,
    /// Grid index at which the iterate reached `side`.
    pub start: usize,
    /// Grid index at which the opposite barrier was reached; equals the grid length when it never was.
    pub stop: usize,
    /// Compensator of this phase, zero before `start` and frozen from `stop` on.
    pub compensator: GridPath,
}

/// Record of the alternating construction.
#[derive(Debug, Clone)]
pub struct AlternatingTrace {
    phases: Vec<Phase>,
    beyond_horizon: usize,
}

impl AlternatingTrace {
    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    /// Sentinel index standing for "never within the horizon".
    pub fn beyond_horizon(&self) -> usize {
        self.beyond_horizon
    }

    /// Start indices of lower phases (the `T_k`).
    pub fn lower_hits(&self) -> Vec<usize> {
        self.starts(Side::Lower)
    }

    /// Start indices of upper phases (the `S_k`).
    pub fn upper_hits(&self) -> Vec<usize> {
        self.starts(Side::Upper)
    }

    fn starts(&self, side: Side) -> Vec<usize> {
        self.phases.iter().filter(|p| p.side == side).map(|p| p.start).collect()
    }

    /// Number of barrier hits that opened a phase.
    pub fn crossing_count(&self) -> usize {
        self.phases.len()
    }

    /// First barrier reached, if any.
    pub fn first_side(&self) -> Option<Side> {
        self.phases.first().map(|p| p.side)
    }
}

/// Solves `SPR(Y, L, U)` under a positive gap by alternating one-sided reflections.
///
/// A barrier counts as reached when the iterate is within `tol` of it, so the
/// gap must exceed `2 tol` for phases to advance.
pub fn solve_spr_alternating(problem: &SprProblem) -> Result<(SprSolution, AlternatingTrace)> {
    let tol = problem.tol();
    let y = problem.y().values();
    let l = problem.lower().values();
    let u = problem.upper().values();
    let n = y.len();

    for k in 0..n {
        let gap = u[k] - l[k];
        if gap <= 0.0 {
            return Err(Error::Touching { index: k, gap });
        }
        if gap <= 2.0 * tol {
            return Err(Error::GapBelowTolerance { index: k, gap, tol });
        }
    }

    let mut plus = vec![0.0; n];
    let mut minus = vec![0.0; n];
    let mut phases = Vec::new();

    let first_lower = (0..n).find(|&k| y[k] <= l[k] + tol);
    let first_upper = (0..n).find(|&k| y[k] >= u[k] - tol);
    let mut next = match (first_lower, first_upper) {
        (None, None) => None,
        (Some(a), None) => Some((Side::Lower, a)),
        (None, Some(b)) => Some((Side::Upper, b)),
        (Some(a), Some(b)) if a <= b => Some((Side::Lower, a)),
        (Some(_), Some(b)) => Some((Side::Upper, b)),
    };

    while let Some((side, start)) = next {
        let mut comp = vec![0.0; n];
        let mut running = 0.0f64;
        let mut stop = n;
        for k in start..n {
            let base = y[k] + plus[k] - minus[k];
            let reached_other = match side {
                Side::Lower => {
                    running = running.max(l[k] - base);
                    base + running >= u[k] - tol
                }
                Side::Upper => {
                    running = running.max(base - u[k]);
                    base - running <= l[k] + tol
                }
            };
            comp[k] = running;
            if reached_other {
                stop = k;
                break;
            }
        }
        for c in comp.iter_mut().skip(stop + 1) {
            *c = running;
        }
        debug_assert!(stop > start || phases.is_empty() && stop == n);

        let target = match side {
            Side::Lower => &mut plus,
            Side::Upper => &mut minus,
        };
        for (t, c) in target.iter_mut().zip(&comp).skip(start) {
            *t += c;
        }
        phases.push(Phase { side, start, stop, compensator: GridPath::new(problem.y().grid().clone(), comp)? });
        next = (stop < n).then(|| (side.flip(), stop));
    }

    let grid = problem.y().grid().clone();
    let x: Vec<f64> = (0..n).map(|k| y[k] + plus[k] - minus[k]).collect();
    let k = BoundedVariationPath::from_parts(GridPath::new(grid.clone(), plus)?, GridPath::new(grid.clone(), minus)?)?;
    let solution = SprSolution::new(GridPath::new(grid, x)?, k)?;
    Ok((solution, AlternatingTrace { phases, beyond_horizon: n }))
}
