use crate::error::Result;
use crate::path::{BoundedVariationPath, GridPath};

use super::{SprProblem, SprSolution};

/// Reference solver: one clamp per grid step.
///
/// Each increment of `Y` is applied to the previous state and the result is
/// projected onto `[L_k, U_k]`; the projection distance is charged to `K⁺` or
/// `K⁻`. Independent of the alternating construction and used as its oracle.
pub fn solve_spr_discrete_oracle(problem: &SprProblem) -> Result<SprSolution> {
    let y = problem.y().values();
    let l = problem.lower().values();
    let u = problem.upper().values();
    let n = y.len();

    let mut x = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    x.push(y[0]);
    plus.push(0.0);
    minus.push(0.0);
    for k in 1..n {
        let candidate = x[k - 1] + (y[k] - y[k - 1]);
        x.push(candidate.max(l[k]).min(u[k]));
        plus.push(plus[k - 1] + (l[k] - candidate).max(0.0));
        minus.push(minus[k - 1] + (candidate - u[k]).max(0.0));
    }

    let grid = problem.y().grid().clone();
    let k = BoundedVariationPath::from_parts(GridPath::new(grid.clone(), plus)?, GridPath::new(grid.clone(), minus)?)?;
    SprSolution::new(GridPath::new(grid, x)?, k)
}
