use serde::Serialize;

use crate::error::Result;
use crate::path::{stieltjes_running, sup_distance, GridPath};

use super::{SprProblem, SprSolution};

/// Residuals of the three defining conditions of a solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerificationReport {
    /// `sup |X - (Y + K⁺ - K⁻)|`.
    pub residual_decomposition: f64,
    /// `max_k max(L_k - X_k, X_k - U_k, 0)`.
    pub residual_constraint: f64,
    /// `Σ (X - L) dK⁺`.
    pub residual_complementarity_plus: f64,
    /// `Σ (U - X) dK⁻`.
    pub residual_complementarity_minus: f64,
    pub k_plus_nondecreasing: bool,
    pub k_minus_nondecreasing: bool,
    pub null_at_origin: bool,
    pub tol: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn max_residual(&self) -> f64 {
        self.residual_decomposition
            .max(self.residual_constraint)
            .max(self.residual_complementarity_plus)
            .max(self.residual_complementarity_minus)
    }
}

pub fn verify_solution(problem: &SprProblem, sol: &SprSolution) -> Result<VerificationReport> {
    verify_triple(problem, sol.x(), sol.k_plus(), sol.k_minus())
}

/// Checks a raw triple, which need not satisfy the compensator invariants.
pub fn verify_triple(
    problem: &SprProblem,
    x: &GridPath,
    k_plus: &GridPath,
    k_minus: &GridPath,
) -> Result<VerificationReport> {
    let (y, l, u) = (problem.y(), problem.lower(), problem.upper());
    for p in [x, k_plus, k_minus] {
        y.ensure_same_grid(p)?;
    }
    let tol = problem.tol();

    let rebuilt = y.add(k_plus)?.sub(k_minus)?;
    let residual_decomposition = sup_distance(x, &rebuilt)?;
    let residual_constraint = x
        .values()
        .iter()
        .zip(l.values().iter().zip(u.values()))
        .map(|(x, (l, u))| (l - x).max(x - u).max(0.0))
        .fold(0.0, f64::max);
    let residual_complementarity_plus = signed_stieltjes(&x.sub(l)?, k_plus);
    let residual_complementarity_minus = signed_stieltjes(&u.sub(x)?, k_minus);

    let k_plus_nondecreasing = k_plus.is_nondecreasing();
    let k_minus_nondecreasing = k_minus.is_nondecreasing();
    let null_at_origin = k_plus.first() == 0.0 && k_minus.first() == 0.0;
    let pass = residual_decomposition <= tol
        && residual_constraint <= tol
        && residual_complementarity_plus <= tol
        && residual_complementarity_minus <= tol
        && k_plus_nondecreasing
        && k_minus_nondecreasing
        && null_at_origin;
    Ok(VerificationReport {
        residual_decomposition,
        residual_constraint,
        residual_complementarity_plus,
        residual_complementarity_minus,
        k_plus_nondecreasing,
        k_minus_nondecreasing,
        null_at_origin,
        tol,
        pass,
    })
}

// Same sum as `stieltjes_sum` without the monotonicity precondition.
fn signed_stieltjes(f: &GridPath, k: &GridPath) -> f64 {
    f.values()[1..].iter().zip(k.values().windows(2)).map(|(fv, w)| fv * (w[1] - w[0])).sum()
}

/// Both sides of the stability bound for a perturbed upper barrier.
///
/// `a` solves `SPR(Y, L, U)` and `b` solves `SPR(Y, L, Ũ)`. Returns
/// `lhs_k = (X_k - X̃_k)²` and
/// `rhs_k = 2 Σ_{j<=k} (Ũ_j - U_j) ΔK⁻_j + 2 Σ_{j<=k} (U_j - Ũ_j) ΔK̃⁻_j`.
pub fn upper_perturbation_bound(
    a: &SprSolution,
    b: &SprSolution,
    upper: &GridPath,
    upper_tilde: &GridPath,
) -> Result<(GridPath, GridPath)> {
    let lhs = a.x().zip_with(b.x(), |x, xt| (x - xt) * (x - xt))?;
    let first = stieltjes_running(&upper_tilde.sub(upper)?, a.k_minus())?;
    let second = stieltjes_running(&upper.sub(upper_tilde)?, b.k_minus())?;
    let rhs = first.zip_with(&second, |p, q| 2.0 * p + 2.0 * q)?;
    Ok((lhs, rhs))
}

/// Mirrored bound for a perturbed lower barrier.
///
/// `a` solves `SPR(Y, L, U)` and `b` solves `SPR(Y, L̃, U)`;
/// `rhs_k = 2 Σ_{j<=k} (L_j - L̃_j) ΔK⁺_j + 2 Σ_{j<=k} (L̃_j - L_j) ΔK̃⁺_j`.
pub fn lower_perturbation_bound(
    a: &SprSolution,
    b: &SprSolution,
    lower: &GridPath,
    lower_tilde: &GridPath,
) -> Result<(GridPath, GridPath)> {
    let lhs = a.x().zip_with(b.x(), |x, xt| (x - xt) * (x - xt))?;
    let first = stieltjes_running(&lower.sub(lower_tilde)?, a.k_plus())?;
    let second = stieltjes_running(&lower_tilde.sub(lower)?, b.k_plus())?;
    let rhs = first.zip_with(&second, |p, q| 2.0 * p + 2.0 * q)?;
    Ok((lhs, rhs))
}

/// Distance to the barrier at the indices where a compensator moves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SupportViolation {
    /// `max |X_k - L_k|` over `ΔK⁺_k > 0`.
    pub plus: f64,
    /// `max |U_k - X_k|` over `ΔK⁻_k > 0`.
    pub minus: f64,
}

impl SupportViolation {
    pub fn max(&self) -> f64 {
        self.plus.max(self.minus)
    }
}

pub fn support_violation(sol: &SprSolution, lower: &GridPath, upper: &GridPath) -> Result<SupportViolation> {
    sol.x().ensure_same_grid(lower)?;
    sol.x().ensure_same_grid(upper)?;
    let (x, l, u) = (sol.x().values(), lower.values(), upper.values());
    let (kp, km) = (sol.k_plus().values(), sol.k_minus().values());
    let mut out = SupportViolation::default();
    for k in 1..x.len() {
        if kp[k] > kp[k - 1] {
            out.plus = out.plus.max((x[k] - l[k]).abs());
        }
        if km[k] > km[k - 1] {
            out.minus = out.minus.max((u[k] - x[k]).abs());
        }
    }
    Ok(out)
}
