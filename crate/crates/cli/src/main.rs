//! `skorokhod` command-line driver.
//!
//! Exit codes: 0 success, 1 bad input or internal error, 2 verification
//! failure or touching barriers, 3 Picard non-convergence.

mod config;
mod output;

use std::fs::File;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use skorokhod::generate::{sweep, GeneratorSpec};
use skorokhod::io::{read_path_csv, read_solution_csv, write_solution_csv};
use skorokhod::path::{sup_distance, BoundedVariationPath, GridPath, TimeGrid, DEFAULT_TOL};
use skorokhod::sde::{
    contraction_report, equation_residual, monte_carlo, picard_iterate, sample_brownian, MonteCarloConfig,
};
use skorokhod::separation::{stationarity_index, BarrierPair};
use skorokhod::spr::{
    solve_spr_alternating, solve_spr_discrete_oracle, support_violation, verify_solution, verify_triple,
    AlternatingTrace, SprProblem, SprSolution,
};
use skorokhod::{Error, Execution};

use config::SdeConfig;
use output::{log, write_atomic, write_json, Fingerprint};

const EXIT_REJECTED: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "skorokhod", version, about = "Two-sided reflection of step paths and reflected SDE simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reflect a driver path between two barriers.
    Spr {
        /// Driver CSV (`t,value`); its times define the grid.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        lower: PathBuf,
        #[arg(long)]
        upper: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Solution CSV (`t,X,Kplus,Kminus`).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Solver::Alternating)]
        solver: Solver,
    },
    /// Check a solution CSV against its driver and barriers.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        lower: PathBuf,
        #[arg(long)]
        upper: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the separation gap, status and stationarity index of a barrier pair.
    Gap {
        #[arg(long)]
        lower: PathBuf,
        #[arg(long)]
        upper: PathBuf,
    },
    /// Solve one reflected SDE path by Picard iteration.
    Sde {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Solution CSV (`t,X,Kplus,Kminus`), written only on convergence.
        #[arg(long)]
        out: PathBuf,
        /// Iteration trace JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Monte Carlo statistics over independent Brownian paths.
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        paths: usize,
        /// Statistics JSON.
        #[arg(long)]
        out: PathBuf,
        /// Per-time mean and variance CSV (`t,mean,variance`).
        #[arg(long)]
        moments: Option<PathBuf>,
        /// Run on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Cross-check both solvers on seeded random instances.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 0.05)]
        gap_min: f64,
        #[arg(long, default_value_t = 1.0)]
        gap_max: f64,
        /// Total variation of each driver.
        #[arg(long, default_value_t = 20.0)]
        variation: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Solver {
    Alternating,
    Oracle,
}

fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn read_on(path: &Path, grid: Option<&Arc<TimeGrid>>) -> Result<GridPath> {
    read_path_csv(open(path)?, grid).with_context(|| format!("reading {}", path.display()))
}

/// Driver and barriers on the driver's grid, plus a fingerprint of the three files.
fn read_problem(input: &Path, lower: &Path, upper: &Path, tol: f64) -> Result<(SprProblem, Fingerprint)> {
    let mut fp = Fingerprint::default();
    for (label, path) in [("input", input), ("lower", lower), ("upper", upper)] {
        fp.add_file(label, path)?;
    }
    let y = read_on(input, None)?;
    let l = read_on(lower, Some(y.grid()))?;
    let u = read_on(upper, Some(y.grid()))?;
    let barriers = BarrierPair::new(l, u)?;
    if let Some(index) = barriers.first_touching() {
        return Err(Error::Touching { index, gap: barriers.gap() }.into());
    }
    Ok((SprProblem::from_barriers(y, barriers, tol)?, fp))
}

fn trace_summary(trace: &AlternatingTrace) -> serde_json::Value {
    json!({
        "crossing_count": trace.crossing_count(),
        "first_side": trace.first_side(),
        "lower_hits": trace.lower_hits(),
        "upper_hits": trace.upper_hits(),
        "beyond_horizon": trace.beyond_horizon(),
    })
}

fn write_solution(path: &Path, sol: &SprSolution) -> Result<()> {
    write_atomic(path, |w| Ok(write_solution_csv(w, sol)?))
}

fn run_spr(
    input: &Path,
    lower: &Path,
    upper: &Path,
    tol: f64,
    out: &Path,
    report: Option<&Path>,
    solver: Solver,
) -> Result<u8> {
    let start = Instant::now();
    let (problem, fp) = read_problem(input, lower, upper, tol)?;
    let n_star = stationarity_index(problem.lower(), problem.upper())?;
    let (sol, trace) = match solver {
        Solver::Alternating => {
            let (sol, trace) = solve_spr_alternating(&problem)?;
            (sol, Some(trace))
        }
        Solver::Oracle => (solve_spr_discrete_oracle(&problem)?, None),
    };
    let verification = verify_solution(&problem, &sol)?;
    write_solution(out, &sol)?;
    let elapsed = start.elapsed().as_secs_f64();
    log(
        "INFO",
        "spr",
        &[
            ("points", &problem.y().len()),
            ("gap", &problem.barriers().gap()),
            ("max_residual", &verification.max_residual()),
            ("pass", &verification.pass),
            ("elapsed_s", &elapsed),
        ],
    );
    if let Some(path) = report {
        write_json(
            path,
            &json!({
                "schema": config::SCHEMA,
                "command": "spr",
                "solver": solver,
                "fingerprint": fp.hex(),
                "points": problem.y().len(),
                "gap": problem.barriers().gap(),
                "status": problem.barriers().status().label(),
                "stationarity_index": n_star,
                "verification": verification,
                "support_violation": support_violation(&sol, problem.lower(), problem.upper())?,
                "total_variation": sol.total_variation(),
                "trace": trace.as_ref().map(trace_summary),
                "elapsed_seconds": elapsed,
            }),
        )?;
    }
    Ok(if verification.pass { 0 } else { EXIT_REJECTED })
}

fn run_verify(
    input: &Path,
    lower: &Path,
    upper: &Path,
    solution: &Path,
    tol: f64,
    report: Option<&Path>,
) -> Result<u8> {
    let (problem, mut fp) = read_problem(input, lower, upper, tol)?;
    fp.add_file("solution", solution)?;
    let (x, kp, km) = read_solution_csv(open(solution)?, problem.y().grid())
        .with_context(|| format!("reading {}", solution.display()))?;
    let verification = verify_triple(&problem, &x, &kp, &km)?;
    // Support is only meaningful for a well-formed compensator pair.
    let support = BoundedVariationPath::from_parts(kp, km)
        .and_then(|k| SprSolution::new(x, k))
        .and_then(|sol| support_violation(&sol, problem.lower(), problem.upper()))
        .ok();
    log("INFO", "verify", &[("max_residual", &verification.max_residual()), ("pass", &verification.pass)]);
    println!(
        "pass={} decomposition={:e} constraint={:e} complementarity_plus={:e} complementarity_minus={:e}",
        verification.pass,
        verification.residual_decomposition,
        verification.residual_constraint,
        verification.residual_complementarity_plus,
        verification.residual_complementarity_minus
    );
    if let Some(path) = report {
        write_json(
            path,
            &json!({
                "schema": config::SCHEMA,
                "command": "verify",
                "fingerprint": fp.hex(),
                "verification": verification,
                "support_violation": support,
            }),
        )?;
    }
    Ok(if verification.pass { 0 } else { EXIT_REJECTED })
}

fn run_gap(lower: &Path, upper: &Path) -> Result<u8> {
    let l = read_on(lower, None)?;
    let u = read_on(upper, Some(l.grid()))?;
    let pair = BarrierPair::new(l, u)?;
    let status = pair.status();
    match stationarity_index(pair.lower(), pair.upper()) {
        Ok(n) => {
            println!("gap={:e} status={} n_star={n}", pair.gap(), status.label());
            Ok(0)
        }
        Err(_) => {
            println!("gap={:e} status={} n_star=none", pair.gap(), status.label());
            log("WARN", "gap", &[("touching_index", &pair.first_touching().unwrap_or(0))]);
            Ok(EXIT_REJECTED)
        }
    }
}

fn run_sde(config: &Path, seed: u64, out: &Path, trace_path: Option<&Path>) -> Result<u8> {
    let start = Instant::now();
    let mut loaded = SdeConfig::load(config)?;
    loaded.fingerprint.add("seed", &seed.to_le_bytes());
    let problem = loaded.template.with_brownian(sample_brownian(loaded.template.grid(), seed))?;
    let run = picard_iterate(&problem, problem.driver())?;
    let trace = &run.trace;
    let elapsed = start.elapsed().as_secs_f64();
    log(
        if trace.converged { "INFO" } else { "ERROR" },
        "sde",
        &[
            ("seed", &seed),
            ("iterations", &trace.iterations),
            ("last_residual", &trace.last_residual()),
            ("converged", &trace.converged),
            ("elapsed_s", &elapsed),
        ],
    );

    let barriers = problem.barriers();
    let spr = SprProblem::from_barriers(run.driver.clone(), barriers.clone(), problem.tol)?;
    let verification = verify_solution(&spr, &run.solution)?;
    if let Some(path) = trace_path {
        let grid = problem.grid();
        write_json(
            path,
            &json!({
                "schema": config::SCHEMA,
                "command": "sde",
                "seed": seed,
                "fingerprint": loaded.fingerprint.hex(),
                "coefficients": loaded.config.coefficients,
                "trace": trace,
                "contraction": contraction_report(trace, problem.coefficients().lambda(), grid.horizon()).ok(),
                "assumptions": problem.coefficients().check_assumptions(grid.points(), 10.0, 1000, seed),
                "verification": verification,
                "equation_residual": equation_residual(&problem, &run.solution)?,
                "support_violation": support_violation(&run.solution, barriers.lower(), barriers.upper())?,
                "total_variation": run.solution.total_variation(),
                "elapsed_seconds": elapsed,
            }),
        )?;
    }
    if !trace.converged {
        return Ok(EXIT_NOT_CONVERGED);
    }
    write_solution(out, &run.solution)?;
    Ok(if verification.pass { 0 } else { EXIT_REJECTED })
}

fn run_mc(config: &Path, seed: u64, paths: usize, out: &Path, moments: Option<&Path>, sequential: bool) -> Result<u8> {
    let start = Instant::now();
    let loaded = SdeConfig::load(config)?;
    let mc = MonteCarloConfig::new(paths, seed).with_execution(execution(sequential));
    let stats = monte_carlo(&loaded.template, &mc)?;
    let elapsed = start.elapsed().as_secs_f64();
    log(
        "INFO",
        "mc",
        &[
            ("paths", &paths),
            ("converged", &stats.converged),
            ("non_converged", &stats.non_converged),
            ("errored", &stats.errored),
            ("verification_failures", &stats.verification_failures),
            ("elapsed_s", &elapsed),
        ],
    );
    let mut fp = loaded.fingerprint;
    fp.add("seed", &seed.to_le_bytes());
    fp.add("paths", &(paths as u64).to_le_bytes());
    write_json(
        out,
        &json!({
            "schema": config::SCHEMA,
            "command": "mc",
            "fingerprint": fp.hex(),
            "statistics": stats,
            "elapsed_seconds": elapsed,
        }),
    )?;
    if let Some(path) = moments {
        write_atomic(path, |w| {
            writeln!(w, "t,mean,variance")?;
            for ((t, m), v) in stats.times.iter().zip(&stats.mean).zip(&stats.variance) {
                let f = skorokhod::io::format_number;
                writeln!(w, "{},{},{}", f(*t), f(*m), f(*v))?;
            }
            Ok(())
        })?;
    }
    Ok(if stats.non_converged > 0 {
        EXIT_NOT_CONVERGED
    } else if stats.verification_failures > 0 || stats.errored > 0 {
        EXIT_REJECTED
    } else {
        0
    })
}

#[derive(Serialize)]
struct FuzzSummary {
    seed: u64,
    count: u64,
    generator: GeneratorSpec,
    max_distance: f64,
    max_residual: f64,
    max_support_violation: f64,
    max_crossings: usize,
    disagreements: Vec<u64>,
    verification_failures: Vec<u64>,
}

#[allow(clippy::too_many_arguments)]
fn run_fuzz(
    seed: u64,
    count: u64,
    steps: usize,
    gap_min: f64,
    gap_max: f64,
    variation: f64,
    tol: f64,
    report: Option<&Path>,
    sequential: bool,
) -> Result<u8> {
    let start = Instant::now();
    let spec = GeneratorSpec { steps, gap_min, gap_max, driver_variation: variation, tol, ..Default::default() };
    let end = seed.checked_add(count).context("seed range overflows u64")?;
    let rows = sweep(seed..end, &spec, execution(sequential), |s, p| -> skorokhod::Result<_> {
        let (alt, trace) = solve_spr_alternating(&p)?;
        let oracle = solve_spr_discrete_oracle(&p)?;
        let dist = sup_distance(alt.x(), oracle.x())?
            .max(sup_distance(alt.k_plus(), oracle.k_plus())?)
            .max(sup_distance(alt.k_minus(), oracle.k_minus())?);
        let report = verify_solution(&p, &alt)?;
        let support = support_violation(&alt, p.lower(), p.upper())?.max();
        Ok((s, dist, report, support, trace.crossing_count()))
    })?;
    let mut summary = FuzzSummary {
        seed,
        count,
        generator: spec,
        max_distance: 0.0,
        max_residual: 0.0,
        max_support_violation: 0.0,
        max_crossings: 0,
        disagreements: Vec::new(),
        verification_failures: Vec::new(),
    };
    for row in rows {
        let (s, dist, report, support, crossings) = row?;
        summary.max_distance = summary.max_distance.max(dist);
        summary.max_residual = summary.max_residual.max(report.max_residual());
        summary.max_support_violation = summary.max_support_violation.max(support);
        summary.max_crossings = summary.max_crossings.max(crossings);
        if dist > tol {
            summary.disagreements.push(s);
        }
        if !report.pass {
            summary.verification_failures.push(s);
        }
    }
    let ok = summary.disagreements.is_empty() && summary.verification_failures.is_empty();
    log(
        if ok { "INFO" } else { "ERROR" },
        "fuzz",
        &[
            ("count", &count),
            ("max_distance", &summary.max_distance),
            ("max_residual", &summary.max_residual),
            ("disagreements", &summary.disagreements.len()),
            ("verification_failures", &summary.verification_failures.len()),
            ("elapsed_s", &start.elapsed().as_secs_f64()),
        ],
    );
    println!(
        "instances={count} max_distance={:e} max_residual={:e} disagreements={} verification_failures={}",
        summary.max_distance,
        summary.max_residual,
        summary.disagreements.len(),
        summary.verification_failures.len()
    );
    if let Some(path) = report {
        write_json(path, &summary)?;
    }
    Ok(if ok { 0 } else { EXIT_REJECTED })
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Spr { input, lower, upper, tol, out, report, solver } => {
            run_spr(&input, &lower, &upper, tol, &out, report.as_deref(), solver)
        }
        Command::Verify { input, lower, upper, solution, tol, report } => {
            run_verify(&input, &lower, &upper, &solution, tol, report.as_deref())
        }
        Command::Gap { lower, upper } => run_gap(&lower, &upper),
        Command::Sde { config, seed, out, trace } => run_sde(&config, seed, &out, trace.as_deref()),
        Command::Mc { config, seed, paths, out, moments, sequential } => {
            run_mc(&config, seed, paths, &out, moments.as_deref(), sequential)
        }
        Command::Fuzz { seed, count, steps, gap_min, gap_max, variation, tol, report, sequential } => {
            run_fuzz(seed, count, steps, gap_min, gap_max, variation, tol, report.as_deref(), sequential)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(Error::Touching { .. } | Error::GapBelowTolerance { .. }) => EXIT_REJECTED,
        Some(Error::NotConverged { .. }) => EXIT_NOT_CONVERGED,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let code = exit_code(&err);
            log("ERROR", "failed", &[("exit", &code), ("error", &format!("{err:#}"))]);
            ExitCode::from(code)
        }
    }
}
