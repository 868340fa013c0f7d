//! Right-continuous step paths on a finite time grid.
//!
//! A [`GridPath`] holds one value per grid point; the path equals `v_k` on
//! `[t_k, t_{k+1})`, so its left limit at `t_k` is `v_{k-1}` and every jump
//! sits on a grid point. Paths that interact must share a grid. Moving a
//! path onto another grid is only done through [`GridPath::resample`].

use std::sync::Arc;

use crate::error::{Error, Result};

/// Default absolute tolerance for floating-point comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Strictly increasing time points `0 = t_0 < t_1 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::GridTooShort(points.len()));
        }
        for (index, &t) in points.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonFinite { index, value: t });
            }
        }
        if points[0] != 0.0 {
            return Err(Error::GridStart(points[0]));
        }
        if let Some(index) = points.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::GridNotIncreasing { index: index + 1 });
        }
        Ok(Self { points })
    }

    /// `steps` equal intervals on `[0, horizon]`. The last point is exactly `horizon`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if horizon.is_nan() || horizon <= 0.0 || horizon.is_infinite() {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::GridTooShort(1));
        }
        let mut points: Vec<f64> = (0..=steps).map(|k| horizon * k as f64 / steps as f64).collect();
        points[steps] = horizon;
        Self::new(points)
    }

    /// Union of two grids on the same horizon.
    pub fn merge(&self, other: &TimeGrid) -> Result<Self> {
        if self.horizon() != other.horizon() {
            return Err(Error::GridMismatch);
        }
        let mut points: Vec<f64> = self.points.iter().chain(&other.points).copied().collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        Self::new(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the last grid point, `N`.
    pub fn last_index(&self) -> usize {
        self.points.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn time(&self, k: usize) -> f64 {
        self.points[k]
    }

    /// Length of the interval `[t_{k-1}, t_k]`, for `k >= 1`.
    pub fn step(&self, k: usize) -> f64 {
        self.points[k] - self.points[k - 1]
    }

    /// Largest index `k` with `t_k <= t`, clamped to the grid.
    pub fn locate(&self, t: f64) -> usize {
        self.points.partition_point(|&p| p <= t).saturating_sub(1)
    }
}

/// Right-continuous step path with one value per grid point.
#[derive(Debug, Clone)]
pub struct GridPath {
    grid: Arc<TimeGrid>,
    values: Vec<f64>,
}

impl PartialEq for GridPath {
    fn eq(&self, other: &Self) -> bool {
        self.same_grid(other) && self.values == other.values
    }
}

impl GridPath {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index, value: values[index] });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: Arc<TimeGrid>, value: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![value; n])
    }

    pub fn zeros(grid: Arc<TimeGrid>) -> Self {
        let n = grid.len();
        Self { grid, values: vec![0.0; n] }
    }

    /// Samples `f` at every grid time.
    pub fn from_fn(grid: Arc<TimeGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    /// Rebuilds a path from its initial value and its jumps `Δp_k`, `k >= 1`.
    pub fn from_jumps(grid: Arc<TimeGrid>, start: f64, jumps: &[f64]) -> Result<Self> {
        let mut values = Vec::with_capacity(jumps.len() + 1);
        let mut acc = start;
        values.push(acc);
        for &j in jumps {
            acc += j;
            values.push(acc);
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// True if both paths sit on the same grid, either the same allocation or equal points.
    pub fn same_grid(&self, other: &GridPath) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn ensure_same_grid(&self, other: &GridPath) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Value at the grid point `k`.
    pub fn at(&self, k: usize) -> Result<f64> {
        self.values.get(k).copied().ok_or(Error::IndexOutOfRange { index: k, last: self.values.len() - 1 })
    }

    /// Value of the step function at an arbitrary time in `[0, T]`.
    pub fn eval(&self, t: f64) -> f64 {
        self.values[self.grid.locate(t)]
    }

    /// Left limit `p_{t_k-}`; at `k = 0` the path is taken continuous at the origin.
    pub fn left_limit(&self, k: usize) -> Result<f64> {
        if k >= self.values.len() {
            return Err(Error::IndexOutOfRange { index: k, last: self.values.len() - 1 });
        }
        Ok(if k == 0 { self.values[0] } else { self.values[k - 1] })
    }

    /// Jump `Δp_k = p_k - p_{k-}`; zero at the origin.
    pub fn jump(&self, k: usize) -> Result<f64> {
        Ok(self.at(k)? - self.left_limit(k)?)
    }

    /// All jumps `Δp_1, ..., Δp_N`.
    pub fn jumps(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<GridPath> {
        GridPath::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &GridPath, f: impl Fn(f64, f64) -> f64) -> Result<GridPath> {
        self.ensure_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        GridPath::new(self.grid.clone(), values)
    }

    pub fn add(&self, other: &GridPath) -> Result<GridPath> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridPath) -> Result<GridPath> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn shift(&self, c: f64) -> Result<GridPath> {
        self.map(|v| v + c)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max_k |p_k|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Σ |Δp_k|`, the total variation of the step path.
    pub fn variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Index of the first decrease, if any.
    pub fn first_decrease(&self) -> Option<usize> {
        self.values.windows(2).position(|w| w[1] < w[0]).map(|i| i + 1)
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.first_decrease().is_none()
    }

    /// Evaluates the step function on another grid. The only way to move a path between grids.
    pub fn resample(&self, grid: Arc<TimeGrid>) -> Result<GridPath> {
        if grid.horizon() != self.grid.horizon() {
            return Err(Error::GridMismatch);
        }
        let values = grid.points().iter().map(|&t| self.eval(t)).collect();
        GridPath::new(grid, values)
    }
}

/// Bounded-variation path `K = K⁺ - K⁻` with its minimal Jordan decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedVariationPath {
    plus: GridPath,
    minus: GridPath,
}

impl BoundedVariationPath {
    /// Checks that both parts are null at 0, nondecreasing and never move at the same index.
    pub fn from_parts(plus: GridPath, minus: GridPath) -> Result<Self> {
        plus.ensure_same_grid(&minus)?;
        if plus.first() != 0.0 || minus.first() != 0.0 {
            return Err(Error::CompensatorNotNull { plus: plus.first(), minus: minus.first() });
        }
        if let Some(index) = plus.first_decrease().or_else(|| minus.first_decrease()) {
            return Err(Error::NotIncreasing { index });
        }
        let overlap =
            plus.values.windows(2).zip(minus.values.windows(2)).position(|(p, m)| p[1] != p[0] && m[1] != m[0]);
        if let Some(i) = overlap {
            return Err(Error::OverlappingSupports { index: i + 1 });
        }
        Ok(Self { plus, minus })
    }

    /// Minimal decomposition of a path starting at zero, by a forward scan of its jumps.
    pub fn decompose(path: &GridPath) -> Result<Self> {
        if path.first() != 0.0 {
            return Err(Error::CompensatorNotNull { plus: path.first(), minus: 0.0 });
        }
        let n = path.len();
        let mut plus = Vec::with_capacity(n);
        let mut minus = Vec::with_capacity(n);
        let (mut p, mut m) = (0.0, 0.0);
        plus.push(p);
        minus.push(m);
        for jump in path.jumps() {
            if jump > 0.0 {
                p += jump;
            } else {
                m -= jump;
            }
            plus.push(p);
            minus.push(m);
        }
        let grid = path.grid().clone();
        Self::from_parts(GridPath::new(grid.clone(), plus)?, GridPath::new(grid, minus)?)
    }

    pub fn zero(grid: Arc<TimeGrid>) -> Self {
        Self { plus: GridPath::zeros(grid.clone()), minus: GridPath::zeros(grid) }
    }

    pub fn plus(&self) -> &GridPath {
        &self.plus
    }

    pub fn minus(&self) -> &GridPath {
        &self.minus
    }

    /// `K = K⁺ - K⁻`.
    pub fn net(&self) -> GridPath {
        self.plus.sub(&self.minus).expect("parts share a grid")
    }

    /// `Var_[0,T](K) = K⁺_T + K⁻_T`.
    pub fn total_variation(&self) -> f64 {
        self.plus.last() + self.minus.last()
    }
}

/// Discrete Stieltjes integral `Σ_{k>=1} f(t_k) (K_k - K_{k-1})` against a nondecreasing `K`.
///
/// The integrand is evaluated at the jump time, so a jump of `K` at `t_k` charges `f_{t_k}`.
pub fn stieltjes_sum(f: &GridPath, k: &GridPath) -> Result<f64> {
    f.ensure_same_grid(k)?;
    if let Some(index) = k.first_decrease() {
        return Err(Error::NotIncreasing { index });
    }
    Ok(f.values[1..].iter().zip(k.values.windows(2)).map(|(&fv, w)| fv * (w[1] - w[0])).sum())
}

/// Running Stieltjes sums `Σ_{j<=k} f_j ΔK_j`, one per grid point.
pub fn stieltjes_running(f: &GridPath, k: &GridPath) -> Result<GridPath> {
    f.ensure_same_grid(k)?;
    if let Some(index) = k.first_decrease() {
        return Err(Error::NotIncreasing { index });
    }
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(f.len());
    out.push(0.0);
    for (fv, w) in f.values[1..].iter().zip(k.values.windows(2)) {
        acc += fv * (w[1] - w[0]);
        out.push(acc);
    }
    GridPath::new(f.grid.clone(), out)
}

/// `Var_[0,T](K) = K⁺_T + K⁻_T`.
pub fn total_variation(k: &BoundedVariationPath) -> f64 {
    k.total_variation()
}

/// Pathwise sup distance `max_k |p_k - q_k|`.
pub fn sup_distance(p: &GridPath, q: &GridPath) -> Result<f64> {
    p.ensure_same_grid(q)?;
    Ok(p.values.iter().zip(&q.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
}

/// Left limit of `p` at grid index `k`.
pub fn left_limit(p: &GridPath, k: usize) -> Result<f64> {
    p.left_limit(k)
}
