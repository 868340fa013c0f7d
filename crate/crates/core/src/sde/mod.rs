//! Doubly-reflected SDEs
//! `X_t = H_t + ∫σ(s, X_s) dB_s + ∫a(s, X_s) ds + K⁺_t - K⁻_t` with `L <= X <= U`.
//!
//! The integrals use left-point Euler sums on the grid and the equation is
//! solved by Picard iteration, one two-sided reflection per iterate.

mod brownian;
mod contraction;
mod monte_carlo;
mod picard;

pub use brownian::{sample_brownian, sample_brownian_stream};
pub use contraction::{contraction_report, ContractionReport};
pub use monte_carlo::{monte_carlo, MonteCarloConfig, MonteCarloStatistics};
pub use picard::{
    equation_residual, euler_integrals, picard_iterate, picard_solve, picard_solve_from, PicardRun, PicardTrace,
};

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{GridPath, TimeGrid, DEFAULT_TOL};
use crate::separation::BarrierPair;

pub const DEFAULT_MAX_ITERATIONS: usize = 50;
pub const DEFAULT_TOL_FIXED_POINT: f64 = 1e-10;

pub type CoefficientFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Diffusion `σ(t, x)`, drift `a(t, x)` and a shared Lipschitz/growth constant `λ`.
#[derive(Clone)]
pub struct Coefficients {
    sigma: CoefficientFn,
    drift: CoefficientFn,
    lambda: f64,
}

impl fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficients").field("lambda", &self.lambda).finish_non_exhaustive()
    }
}

impl Coefficients {
    pub fn new(
        sigma: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        drift: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lambda: f64,
    ) -> Result<Self> {
        if lambda.is_nan() || lambda < 0.0 || lambda.is_infinite() {
            return Err(Error::InvalidParameter(format!("lambda must be finite and nonnegative, got {lambda}")));
        }
        Ok(Self { sigma: Arc::new(sigma), drift: Arc::new(drift), lambda })
    }

    pub fn sigma(&self, t: f64, x: f64) -> f64 {
        (self.sigma)(t, x)
    }

    pub fn drift(&self, t: f64, x: f64) -> f64 {
        (self.drift)(t, x)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Spot-checks the Lipschitz and linear-growth conditions with constant `λ`
    /// on random states in `[-range, range]` at the given times.
    pub fn check_assumptions(&self, times: &[f64], range: f64, samples: usize, seed: u64) -> AssumptionCheck {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut check = AssumptionCheck { lambda: self.lambda, lipschitz_ratio: 0.0, growth_ratio: 0.0, holds: true };
        for _ in 0..samples {
            let t = times[rng.random_range(0..times.len())];
            let x = rng.random_range(-range..=range);
            let y = rng.random_range(-range..=range);
            let diff = (self.sigma(t, x) - self.sigma(t, y)).abs() + (self.drift(t, x) - self.drift(t, y)).abs();
            if x != y {
                check.lipschitz_ratio = check.lipschitz_ratio.max(diff / (x - y).abs());
            }
            let size = self.sigma(t, x).abs() + self.drift(t, x).abs();
            check.growth_ratio = check.growth_ratio.max(size / (1.0 + x.abs()));
        }
        let slack = 1.0 + 1e-12;
        check.holds = check.lipschitz_ratio <= self.lambda * slack && check.growth_ratio <= self.lambda * slack;
        check
    }
}

/// Result of [`Coefficients::check_assumptions`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub lambda: f64,
    /// Largest observed `(|Δσ| + |Δa|) / |x - y|`.
    pub lipschitz_ratio: f64,
    /// Largest observed `(|σ| + |a|) / (1 + |x|)`.
    pub growth_ratio: f64,
    pub holds: bool,
}

/// Built-in coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CoefficientSpec {
    /// `σ(t, x) = sigma`, `a(t, x) = drift`.
    Constant { sigma: f64, drift: f64 },
    /// `σ(t, x) = sigma`, `a(t, x) = slope x + offset`.
    LinearDrift {
        sigma: f64,
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `σ(t, x) = sigma`, `a(t, x) = theta (mean - x)`.
    Ou { theta: f64, mean: f64, sigma: f64 },
    /// `σ(t, x) = sigma x`, `a(t, x) = mu x`.
    GbmLike { mu: f64, sigma: f64 },
}

impl CoefficientSpec {
    /// Smallest `λ` satisfying both the Lipschitz and the growth condition.
    pub fn lambda(&self) -> f64 {
        match *self {
            CoefficientSpec::Constant { sigma, drift } => sigma.abs() + drift.abs(),
            CoefficientSpec::LinearDrift { sigma, slope, offset } => slope.abs().max(sigma.abs() + offset.abs()),
            CoefficientSpec::Ou { theta, mean, sigma } => theta.abs().max(sigma.abs() + (theta * mean).abs()),
            CoefficientSpec::GbmLike { mu, sigma } => mu.abs() + sigma.abs(),
        }
    }

    pub fn build(&self) -> Result<Coefficients> {
        let params: &[f64] = match self {
            CoefficientSpec::Constant { sigma, drift } => &[*sigma, *drift],
            CoefficientSpec::LinearDrift { sigma, slope, offset } => &[*sigma, *slope, *offset],
            CoefficientSpec::Ou { theta, mean, sigma } => &[*theta, *mean, *sigma],
            CoefficientSpec::GbmLike { mu, sigma } => &[*mu, *sigma],
        };
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coefficient parameter in {self:?}")));
        }
        let lambda = self.lambda();
        match *self {
            CoefficientSpec::Constant { sigma, drift } => {
                Coefficients::new(move |_, _| sigma, move |_, _| drift, lambda)
            }
            CoefficientSpec::LinearDrift { sigma, slope, offset } => {
                Coefficients::new(move |_, _| sigma, move |_, x| slope * x + offset, lambda)
            }
            CoefficientSpec::Ou { theta, mean, sigma } => {
                Coefficients::new(move |_, _| sigma, move |_, x| theta * (mean - x), lambda)
            }
            CoefficientSpec::GbmLike { mu, sigma } => {
                Coefficients::new(move |_, x| sigma * x, move |_, x| mu * x, lambda)
            }
        }
    }
}

/// A doubly-reflected SDE on one sampled Brownian path.
#[derive(Debug, Clone)]
pub struct SdeProblem {
    driver: GridPath,
    coefficients: Coefficients,
    barriers: BarrierPair,
    brownian: GridPath,
    pub tol: f64,
    pub tol_fixed_point: f64,
    pub max_iterations: usize,
}

impl SdeProblem {
    /// Requires a shared grid and `L_0 <= H_0 <= U_0`; tolerances take their defaults.
    pub fn new(
        driver: GridPath,
        coefficients: Coefficients,
        barriers: BarrierPair,
        brownian: GridPath,
    ) -> Result<Self> {
        driver.ensure_same_grid(barriers.lower())?;
        driver.ensure_same_grid(&brownian)?;
        let (lower, value, upper) = (barriers.lower().first(), driver.first(), barriers.upper().first());
        if !(lower <= value && value <= upper) {
            return Err(Error::InitialCondition { lower, value, upper });
        }
        Ok(Self {
            driver,
            coefficients,
            barriers,
            brownian,
            tol: DEFAULT_TOL,
            tol_fixed_point: DEFAULT_TOL_FIXED_POINT,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        })
    }

    pub fn with_tolerances(mut self, tol: f64, tol_fixed_point: f64, max_iterations: usize) -> Result<Self> {
        if tol.is_nan() || tol <= 0.0 || tol_fixed_point.is_nan() || tol_fixed_point <= 0.0 || max_iterations == 0 {
            return Err(Error::InvalidParameter("tolerances must be positive and max_iterations at least 1".into()));
        }
        self.tol = tol;
        self.tol_fixed_point = tol_fixed_point;
        self.max_iterations = max_iterations;
        Ok(self)
    }

    /// Same problem driven by another Brownian path.
    pub fn with_brownian(&self, brownian: GridPath) -> Result<Self> {
        self.driver.ensure_same_grid(&brownian)?;
        Ok(Self { brownian, ..self.clone() })
    }

    pub fn driver(&self) -> &GridPath {
        &self.driver
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coefficients
    }

    pub fn barriers(&self) -> &BarrierPair {
        &self.barriers
    }

    pub fn brownian(&self) -> &GridPath {
        &self.brownian
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        self.driver.grid()
    }
}
