use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::{sup_distance, GridPath};
use crate::separation::solve_spr_separated;
use crate::spr::{SprProblem, SprSolution};

use super::SdeProblem;

/// `Y_k = H_k + Σ_{j<k} σ(t_j, X_j)(B_{j+1} - B_j) + Σ_{j<k} a(t_j, X_j)(t_{j+1} - t_j)`.
pub fn euler_integrals(x: &GridPath, problem: &SdeProblem) -> Result<GridPath> {
    let h = problem.driver();
    h.ensure_same_grid(x)?;
    let grid = problem.grid();
    let times = grid.points();
    let b = problem.brownian().values();
    let coeffs = problem.coefficients();

    let mut acc = 0.0;
    let mut out = Vec::with_capacity(x.len());
    out.push(h.first());
    for j in 0..x.len() - 1 {
        let (t, xj) = (times[j], x.values()[j]);
        let sigma = coeffs.sigma(t, xj);
        let drift = coeffs.drift(t, xj);
        for value in [sigma, drift] {
            if !value.is_finite() {
                return Err(Error::Coefficient { t, x: xj, value });
            }
        }
        acc += sigma * (b[j + 1] - b[j]) + drift * (times[j + 1] - t);
        out.push(h.values()[j + 1] + acc);
    }
    GridPath::new(grid.clone(), out)
}

/// Residual history of a Picard run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardTrace {
    /// `r_n = sup |X^{n+1} - X^n|`, one per reflection solve.
    pub residuals: Vec<f64>,
    /// `r_{n+1} / r_n`; `None` where `r_n = 0`.
    pub ratios: Vec<Option<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub tol_fixed_point: f64,
}

impl PicardTrace {
    pub fn last_residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Final iterate and trace, whether or not the scheme converged.
#[derive(Debug, Clone)]
pub struct PicardRun {
    pub solution: SprSolution,
    /// Driver of the last reflection, `H + ∫σ dB + ∫a ds` evaluated at the previous iterate.
    pub driver: GridPath,
    pub trace: PicardTrace,
}

/// Runs the scheme from `initial` until the sup residual drops to
/// `tol_fixed_point` or `max_iterations` reflections have been solved.
pub fn picard_iterate(problem: &SdeProblem, initial: &GridPath) -> Result<PicardRun> {
    problem.driver().ensure_same_grid(initial)?;
    let mut current = initial.clone();
    let mut residuals = Vec::new();
    let mut last = None;
    let mut converged = false;
    for _ in 0..problem.max_iterations {
        let y = euler_integrals(&current, problem)?;
        let spr = SprProblem::from_barriers(y.clone(), problem.barriers().clone(), problem.tol)?;
        let solution = solve_spr_separated(&spr)?;
        let r = sup_distance(solution.x(), &current)?;
        residuals.push(r);
        current = solution.x().clone();
        last = Some((solution, y));
        if r <= problem.tol_fixed_point {
            converged = true;
            break;
        }
    }
    let (solution, driver) = last.ok_or_else(|| Error::InvalidParameter("max_iterations must be at least 1".into()))?;
    let ratios = residuals.windows(2).map(|w| (w[0] > 0.0).then(|| w[1] / w[0])).collect();
    let trace = PicardTrace {
        iterations: residuals.len(),
        residuals,
        ratios,
        converged,
        tol_fixed_point: problem.tol_fixed_point,
    };
    Ok(PicardRun { solution, driver, trace })
}

/// Picard scheme started from `X⁰ = H`.
pub fn picard_solve(problem: &SdeProblem) -> Result<(SprSolution, PicardTrace)> {
    picard_solve_from(problem, problem.driver())
}

/// Picard scheme from an arbitrary initial iterate; non-convergence is an error.
pub fn picard_solve_from(problem: &SdeProblem, initial: &GridPath) -> Result<(SprSolution, PicardTrace)> {
    let run = picard_iterate(problem, initial)?;
    if !run.trace.converged {
        return Err(Error::NotConverged { iterations: run.trace.iterations, last_residual: run.trace.last_residual() });
    }
    Ok((run.solution, run.trace))
}

/// `sup |X - (H + ∫σ(X) dB + ∫a(X) ds + K⁺ - K⁻)|` for a candidate solution.
pub fn equation_residual(problem: &SdeProblem, solution: &SprSolution) -> Result<f64> {
    let y = euler_integrals(solution.x(), problem)?;
    let rebuilt = y.add(solution.k_plus())?.sub(solution.k_minus())?;
    sup_distance(solution.x(), &rebuilt)
}
