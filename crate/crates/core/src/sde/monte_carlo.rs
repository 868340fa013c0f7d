//! Batch driver: one Picard solve per independent Brownian path.
//!
//! Paths are grouped into fixed chunks of [`CHUNK`] consecutive indices. Each
//! chunk accumulates its own running moments and chunks are merged in index
//! order, so the statistics depend only on `(seed, n_paths, grid)` and not on
//! how the work was scheduled.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::spr::{support_violation, verify_solution, SprProblem};

use super::{equation_residual, picard_iterate, sample_brownian_stream, SdeProblem};

const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl MonteCarloConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self { n_paths, seed, execution: Execution::default() }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Per-time moments of `X` across converged paths, plus compensator and health summaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloStatistics {
    pub n_paths: usize,
    pub seed: u64,
    pub converged: usize,
    /// Paths that hit `max_iterations`.
    pub non_converged: usize,
    /// Paths aborted by another error, such as a non-finite coefficient.
    pub errored: usize,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// Unbiased sample variance; zero with fewer than two converged paths.
    pub variance: Vec<f64>,
    pub mean_total_variation: f64,
    /// `E[Var(K)²]`.
    pub total_variation_second_moment: f64,
    pub mean_iterations: f64,
    /// Worst constraint residual `max(L - X, X - U, 0)` over all converged paths.
    pub max_constraint_residual: f64,
    /// Worst distance to the barrier where a compensator moved.
    pub max_support_violation: f64,
    /// Worst `sup |X - (H + ∫σ dB + ∫a ds + K⁺ - K⁻)|` at the final iterate.
    pub max_equation_residual: f64,
    /// Paths whose final triple fails the reflection verifier.
    pub verification_failures: usize,
}

impl MonteCarloStatistics {
    pub fn failures(&self) -> usize {
        self.non_converged + self.errored
    }
}

#[derive(Debug, Clone)]
struct Moments {
    count: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
    tv_sum: f64,
    tv_sq_sum: f64,
    iterations: usize,
    non_converged: usize,
    errored: usize,
    max_constraint: f64,
    max_support: f64,
    max_equation: f64,
    verification_failures: usize,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            count: 0,
            mean: vec![0.0; len],
            m2: vec![0.0; len],
            tv_sum: 0.0,
            tv_sq_sum: 0.0,
            iterations: 0,
            non_converged: 0,
            errored: 0,
            max_constraint: 0.0,
            max_support: 0.0,
            max_equation: 0.0,
            verification_failures: 0,
        }
    }

    // Welford update
    fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let n = self.count as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / n;
            *s += d * (v - *m);
        }
    }

    // Chan et al. pairwise combination
    fn merge(&mut self, other: &Moments) {
        if other.count > 0 {
            let (na, nb) = (self.count as f64, other.count as f64);
            let n = na + nb;
            for k in 0..self.mean.len() {
                let d = other.mean[k] - self.mean[k];
                self.mean[k] += d * nb / n;
                self.m2[k] += other.m2[k] + d * d * na * nb / n;
            }
            self.count += other.count;
        }
        self.tv_sum += other.tv_sum;
        self.tv_sq_sum += other.tv_sq_sum;
        self.iterations += other.iterations;
        self.non_converged += other.non_converged;
        self.errored += other.errored;
        self.max_constraint = self.max_constraint.max(other.max_constraint);
        self.max_support = self.max_support.max(other.max_support);
        self.max_equation = self.max_equation.max(other.max_equation);
        self.verification_failures += other.verification_failures;
    }
}

fn run_chunk(template: &SdeProblem, config: &MonteCarloConfig, chunk: usize) -> Moments {
    let grid = template.grid();
    let mut acc = Moments::new(grid.len());
    let end = ((chunk + 1) * CHUNK).min(config.n_paths);
    for path in chunk * CHUNK..end {
        let brownian = sample_brownian_stream(grid, config.seed, path as u64);
        let outcome = template.with_brownian(brownian).and_then(|p| picard_iterate(&p, p.driver()).map(|r| (p, r)));
        let (problem, run) = match outcome {
            Ok((_, run)) if !run.trace.converged => {
                acc.non_converged += 1;
                continue;
            }
            Ok(v) => v,
            Err(_) => {
                acc.errored += 1;
                continue;
            }
        };
        let (solution, trace) = (&run.solution, &run.trace);
        let barriers = problem.barriers();
        let (l, u) = (barriers.lower().values(), barriers.upper().values());
        let constraint = solution
            .x()
            .values()
            .iter()
            .zip(l.iter().zip(u))
            .map(|(x, (l, u))| (l - x).max(x - u).max(0.0))
            .fold(0.0, f64::max);
        acc.max_constraint = acc.max_constraint.max(constraint);
        if let Ok(v) = support_violation(solution, barriers.lower(), barriers.upper()) {
            acc.max_support = acc.max_support.max(v.max());
        }
        let verified = SprProblem::from_barriers(run.driver.clone(), barriers.clone(), problem.tol)
            .and_then(|spr| verify_solution(&spr, solution))
            .map(|r| r.pass)
            .unwrap_or(false);
        if let Ok(r) = equation_residual(&problem, solution) {
            acc.max_equation = acc.max_equation.max(r);
        }
        if !verified {
            acc.verification_failures += 1;
        }
        let tv = solution.total_variation();
        acc.tv_sum += tv;
        acc.tv_sq_sum += tv * tv;
        acc.iterations += trace.iterations;
        acc.push(solution.x().values());
    }
    acc
}

/// Runs `n_paths` independent solves of `template`, path `i` driven by Brownian stream `i` of `seed`.
pub fn monte_carlo(template: &SdeProblem, config: &MonteCarloConfig) -> Result<MonteCarloStatistics> {
    if config.n_paths == 0 {
        return Err(Error::InvalidParameter("n_paths must be at least 1".into()));
    }
    if let Some(index) = template.barriers().first_touching() {
        return Err(Error::Touching { index, gap: template.barriers().gap() });
    }
    let chunks = config.n_paths.div_ceil(CHUNK);
    let partials = map_indexed(chunks, config.execution, |c| run_chunk(template, config, c));
    let mut total = Moments::new(template.grid().len());
    for p in &partials {
        total.merge(p);
    }

    let converged = total.count;
    let denom = converged.max(1) as f64;
    let variance = if converged > 1 {
        total.m2.iter().map(|s| s / (converged - 1) as f64).collect()
    } else {
        vec![0.0; total.m2.len()]
    };
    Ok(MonteCarloStatistics {
        n_paths: config.n_paths,
        seed: config.seed,
        converged,
        non_converged: total.non_converged,
        errored: total.errored,
        times: template.grid().points().to_vec(),
        mean: total.mean,
        variance,
        mean_total_variation: total.tv_sum / denom,
        total_variation_second_moment: total.tv_sq_sum / denom,
        mean_iterations: total.iterations as f64 / denom,
        max_constraint_residual: total.max_constraint,
        max_support_violation: total.max_support,
        max_equation_residual: total.max_equation,
        verification_failures: total.verification_failures,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::path::{GridPath, TimeGrid};
    use crate::sde::{picard_solve, sample_brownian, CoefficientSpec, Coefficients};
    use crate::separation::BarrierPair;

    fn template(spec: CoefficientSpec, lower: f64, upper: f64, steps: usize) -> SdeProblem {
        let g = Arc::new(TimeGrid::uniform(1.0, steps).unwrap());
        let barriers = BarrierPair::new(
            GridPath::constant(g.clone(), lower).unwrap(),
            GridPath::constant(g.clone(), upper).unwrap(),
        )
        .unwrap();
        SdeProblem::new(GridPath::zeros(g.clone()), spec.build().unwrap(), barriers, GridPath::zeros(g)).unwrap()
    }

    #[test]
    fn single_path_equals_single_solve() {
        let t = template(CoefficientSpec::Ou { theta: 1.0, mean: 0.0, sigma: 0.7 }, -0.5, 0.5, 64);
        let stats = monte_carlo(&t, &MonteCarloConfig::new(1, 99)).unwrap();
        let (sol, trace) = picard_solve(&t.with_brownian(sample_brownian(t.grid(), 99)).unwrap()).unwrap();
        assert_eq!(stats.mean, sol.x().values());
        assert!(stats.variance.iter().all(|&v| v == 0.0));
        assert_eq!(stats.mean_total_variation, sol.total_variation());
        assert_eq!(stats.mean_iterations, trace.iterations as f64);
    }

    #[test]
    fn deterministic_driver_has_no_spread() {
        let t = template(CoefficientSpec::Constant { sigma: 0.0, drift: 0.0 }, -1.0, 1.0, 16);
        let stats = monte_carlo(&t, &MonteCarloConfig::new(130, 1)).unwrap();
        assert_eq!(stats.converged, 130);
        assert!(stats.variance.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sequential_and_parallel_agree_bitwise() {
        let t = template(CoefficientSpec::LinearDrift { sigma: 0.5, slope: -1.0, offset: 0.0 }, -0.4, 0.4, 32);
        let seq = monte_carlo(&t, &MonteCarloConfig::new(300, 5).with_execution(Execution::Sequential)).unwrap();
        let par = monte_carlo(&t, &MonteCarloConfig::new(300, 5).with_execution(Execution::Parallel)).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq.verification_failures, 0);
        assert!(seq.max_support_violation <= 1e-10);
    }

    #[test]
    fn failures_are_counted_not_fatal() {
        let t = template(CoefficientSpec::Constant { sigma: 0.5, drift: 0.0 }, -1.0, 1.0, 32)
            .with_tolerances(1e-12, 1e-10, 1)
            .unwrap();
        let stats = monte_carlo(&t, &MonteCarloConfig::new(10, 0)).unwrap();
        assert_eq!(stats.non_converged, 10);
        assert_eq!(stats.converged, 0);

        let g = t.grid().clone();
        let blowup = Coefficients::new(|_, x: f64| if x > 0.0 { f64::NAN } else { 0.3 }, |_, _| 0.0, 1.0).unwrap();
        let barriers = t.barriers().clone();
        let t = SdeProblem::new(GridPath::zeros(g.clone()), blowup, barriers, GridPath::zeros(g)).unwrap();
        let stats = monte_carlo(&t, &MonteCarloConfig::new(20, 0)).unwrap();
        assert_eq!(stats.errored + stats.converged, 20);
        assert!(stats.errored > 0);
    }

    #[test]
    fn zero_paths_rejected() {
        let t = template(CoefficientSpec::Constant { sigma: 0.0, drift: 0.0 }, -1.0, 1.0, 4);
        assert!(matches!(monte_carlo(&t, &MonteCarloConfig::new(0, 0)), Err(Error::InvalidParameter(_))));
    }
}
