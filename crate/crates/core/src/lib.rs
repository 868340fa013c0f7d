//! Two-sided Skorokhod reflection for step paths and doubly-reflected SDEs.
//!
//! - [`path`]: right-continuous step paths on a finite grid and their calculus.
//! - [`spr`]: the reflection problem `SPR(Y, L, U)`, solved by alternating
//!   one-sided reflections and cross-checked against a clamping oracle.
//! - [`separation`]: completely separated barriers and the `U^n = max(U, L + 1/n)` reduction.
//! - [`sde`]: Euler discretization and Picard iteration for reflected SDEs, plus a Monte Carlo driver.
//! - [`generate`]: seeded random instances for fuzzing.
//!
//! ```
//! use std::sync::Arc;
//! use skorokhod::path::{GridPath, TimeGrid};
//! use skorokhod::spr::{solve_spr_alternating, verify_solution, SprProblem};
//!
//! let grid = Arc::new(TimeGrid::uniform(1.0, 3).unwrap());
//! let y = GridPath::new(grid.clone(), vec![0.0, -2.0, 3.0, -1.0]).unwrap();
//! let problem = SprProblem::new(
//!     y,
//!     GridPath::constant(grid.clone(), 0.0).unwrap(),
//!     GridPath::constant(grid, 1.0).unwrap(),
//!     1e-12,
//! )
//! .unwrap();
//! let (solution, _) = solve_spr_alternating(&problem).unwrap();
//! assert_eq!(solution.x().values(), &[0.0, 0.0, 1.0, 0.0]);
//! assert!(verify_solution(&problem, &solution).unwrap().pass);
//! ```

pub mod error;
pub mod generate;
pub mod io;
pub mod par;
pub mod path;
pub mod sde;
pub mod separation;
pub mod spr;

pub use error::{Error, Result};
pub use par::Execution;
