use thiserror::Error;

/// Errors raised by path construction, the reflection solvers and the SDE scheme.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("time grid needs at least two points, got {0}")]
    GridTooShort(usize),
    #[error("time grid must start at 0, got {0}")]
    GridStart(f64),
    #[error("time grid not strictly increasing at index {index}")]
    GridNotIncreasing { index: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("path has {got} values but grid has {expected} points")]
    LengthMismatch { expected: usize, got: usize },
    #[error("paths live on different time grids")]
    GridMismatch,
    #[error("grid index {index} out of range (last index {last})")]
    IndexOutOfRange { index: usize, last: usize },
    #[error("integrator path decreases at index {index}")]
    NotIncreasing { index: usize },
    #[error("compensator does not start at zero (K+_0 = {plus}, K-_0 = {minus})")]
    CompensatorNotNull { plus: f64, minus: f64 },
    #[error("compensators charge the same instant at index {index}")]
    OverlappingSupports { index: usize },
    #[error("initial condition L_0 <= Y_0 <= U_0 violated: L_0 = {lower}, Y_0 = {value}, U_0 = {upper}")]
    InitialCondition { lower: f64, value: f64, upper: f64 },
    #[error("lower barrier exceeds upper barrier at index {index}")]
    BarrierOrder { index: usize },
    #[error("barriers touch at index {index} (gap {gap}); completely separated barriers are required")]
    Touching { index: usize, gap: f64 },
    #[error("barrier gap {gap} at index {index} does not exceed twice the tolerance {tol}")]
    GapBelowTolerance { index: usize, gap: f64, tol: f64 },
    #[error("approximation order must be at least 1")]
    ZeroOrder,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("coefficient returned non-finite value {value} at t = {t}, x = {x}")]
    Coefficient { t: f64, x: f64, value: f64 },
    #[error("need at least {needed} residuals, got {got}")]
    TooFewResiduals { needed: usize, got: usize },
    #[error("picard scheme did not converge in {iterations} iterations (last residual {last_residual:e})")]
    NotConverged { iterations: usize, last_residual: f64 },
    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;
