//! The two-sided Skorokhod problem `SPR(Y, L, U)` on step paths.
//!
//! A solution is a triple `(X, K⁺, K⁻)` with `X = Y + K⁺ - K⁻`, `L <= X <= U`,
//! and compensators that only grow while `X` sits on the matching barrier.

mod alternating;
mod oracle;
mod verify;

pub use alternating::{
    one_sided_reflect_lower, one_sided_reflect_upper, solve_spr_alternating, AlternatingTrace, Phase, Side,
};
pub use oracle::solve_spr_discrete_oracle;
pub use verify::{
    lower_perturbation_bound, support_violation, upper_perturbation_bound, verify_solution, verify_triple,
    SupportViolation, VerificationReport,
};

use crate::error::{Error, Result};
use crate::path::{BoundedVariationPath, GridPath};
use crate::separation::BarrierPair;

/// Driver `Y`, barriers `(L, U)` and the comparison tolerance.
#[derive(Debug, Clone)]
pub struct SprProblem {
    y: GridPath,
    barriers: BarrierPair,
    tol: f64,
}

impl SprProblem {
    /// Requires a shared grid, `L_k <= U_k + tol` everywhere and `L_0 <= Y_0 <= U_0`.
    pub fn new(y: GridPath, lower: GridPath, upper: GridPath, tol: f64) -> Result<Self> {
        y.ensure_same_grid(&lower)?;
        y.ensure_same_grid(&upper)?;
        Self::from_barriers(y, BarrierPair::new(lower, upper)?, tol)
    }

    pub fn from_barriers(y: GridPath, barriers: BarrierPair, tol: f64) -> Result<Self> {
        if tol.is_nan() || tol <= 0.0 || tol.is_infinite() {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        y.ensure_same_grid(barriers.lower())?;
        let (l, u) = (barriers.lower().values(), barriers.upper().values());
        if let Some(index) = l.iter().zip(u).position(|(l, u)| l > &(u + tol)) {
            return Err(Error::BarrierOrder { index });
        }
        let (lower, value, upper) = (l[0], y.first(), u[0]);
        if !(lower <= value && value <= upper) {
            return Err(Error::InitialCondition { lower, value, upper });
        }
        Ok(Self { y, barriers, tol })
    }

    pub fn y(&self) -> &GridPath {
        &self.y
    }

    pub fn lower(&self) -> &GridPath {
        self.barriers.lower()
    }

    pub fn upper(&self) -> &GridPath {
        self.barriers.upper()
    }

    pub fn barriers(&self) -> &BarrierPair {
        &self.barriers
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Same driver and lower barrier, new upper barrier.
    pub fn with_upper(&self, upper: GridPath) -> Result<Self> {
        Self::new(self.y.clone(), self.lower().clone(), upper, self.tol)
    }

    /// Same driver and upper barrier, new lower barrier.
    pub fn with_lower(&self, lower: GridPath) -> Result<Self> {
        Self::new(self.y.clone(), lower, self.upper().clone(), self.tol)
    }

    /// Same barriers, new driver.
    pub fn with_driver(&self, y: GridPath) -> Result<Self> {
        Self::from_barriers(y, self.barriers.clone(), self.tol)
    }
}

/// A solution triple `(X, K⁺, K⁻)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SprSolution {
    x: GridPath,
    k: BoundedVariationPath,
}

impl SprSolution {
    pub fn new(x: GridPath, k: BoundedVariationPath) -> Result<Self> {
        x.ensure_same_grid(k.plus())?;
        Ok(Self { x, k })
    }

    pub fn x(&self) -> &GridPath {
        &self.x
    }

    pub fn k(&self) -> &BoundedVariationPath {
        &self.k
    }

    pub fn k_plus(&self) -> &GridPath {
        self.k.plus()
    }

    pub fn k_minus(&self) -> &GridPath {
        self.k.minus()
    }

    pub fn total_variation(&self) -> f64 {
        self.k.total_variation()
    }
}
