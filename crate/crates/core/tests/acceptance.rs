//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skorokhod::generate::{generate_instance, sweep, GeneratorSpec};
use skorokhod::path::{sup_distance, GridPath, TimeGrid};
use skorokhod::sde::{
    contraction_report, monte_carlo, picard_solve, picard_solve_from, sample_brownian, CoefficientSpec,
    MonteCarloConfig, SdeProblem,
};
use skorokhod::separation::{approx_upper, solve_spr_separated, stationarity_index, BarrierPair};
use skorokhod::spr::{
    lower_perturbation_bound, solve_spr_alternating, solve_spr_discrete_oracle, support_violation,
    upper_perturbation_bound, verify_solution, SprProblem, SprSolution,
};
use skorokhod::{Execution, Result};

const FUZZ_COUNT: u64 = 1000;

type Criterion = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
    support: f64,
}

fn support_of(sol: &SprSolution, lower: &GridPath, upper: &GridPath) -> f64 {
    support_violation(sol, lower, upper).map(|v| v.max()).unwrap_or(f64::INFINITY)
}

fn worst(a: &[f64]) -> f64 {
    a.iter().copied().fold(0.0, f64::max)
}

fn constant(g: &Arc<TimeGrid>, v: f64) -> GridPath {
    GridPath::constant(g.clone(), v).unwrap()
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let rows = sweep(0..FUZZ_COUNT, &GeneratorSpec::default(), Execution::Parallel, |_, p| {
        let (alt, _) = solve_spr_alternating(&p)?;
        let oracle = solve_spr_discrete_oracle(&p)?;
        let d = sup_distance(alt.x(), oracle.x())?
            .max(sup_distance(alt.k_plus(), oracle.k_plus())?)
            .max(sup_distance(alt.k_minus(), oracle.k_minus())?);
        Ok::<_, skorokhod::Error>((d, support_of(&alt, p.lower(), p.upper())))
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let elapsed = start.elapsed();
    let dist = worst(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
    let support = worst(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
    Ok(Outcome {
        pass: dist <= 1e-12 && elapsed < Duration::from_secs(10),
        detail: format!("{} instances, max sup distance {dist:.3e}, {:.2}s", rows.len(), elapsed.as_secs_f64()),
        support,
    })
}

fn criterion_2() -> Result<Outcome> {
    let rows = sweep(0..FUZZ_COUNT, &GeneratorSpec::default(), Execution::Parallel, |_, p| {
        let (alt, _) = solve_spr_alternating(&p)?;
        let oracle = solve_spr_discrete_oracle(&p)?;
        let mut out = Vec::new();
        for sol in [&alt, &oracle] {
            let r = verify_solution(&p, sol)?;
            out.push([
                r.residual_decomposition,
                r.residual_constraint,
                r.residual_complementarity_plus.abs().max(r.residual_complementarity_minus.abs()),
                support_of(sol, p.lower(), p.upper()),
            ]);
        }
        Ok::<_, skorokhod::Error>(out)
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let all: Vec<[f64; 4]> = rows.into_iter().flatten().collect();
    let col = |i: usize| worst(&all.iter().map(|r| r[i]).collect::<Vec<_>>());
    let (decomposition, constraint, complementarity) = (col(0), col(1), col(2));
    Ok(Outcome {
        pass: decomposition <= 1e-12 && constraint <= 1e-12 && complementarity <= 1e-10,
        detail: format!("{} solutions, max decomposition {decomposition:.3e}, constraint {constraint:.3e}, complementarity {complementarity:.3e}", all.len()),
        support: col(3),
    })
}

fn criterion_3() -> Result<Outcome> {
    let spec = GeneratorSpec { gap_min: 0.005, gap_max: 0.5, ..Default::default() };
    let (mut dist, mut excess, mut support, mut max_n) = (0.0f64, 0.0f64, 0.0f64, 0u64);
    for seed in 0..100 {
        let p = generate_instance(10_000 + seed, &spec)?;
        let (l, u) = (p.lower(), p.upper());
        let n_star = stationarity_index(l, u)?;
        max_n = max_n.max(n_star);
        let u_star = approx_upper(l, u, n_star)?;
        excess = excess.max(u_star.sub(u)?.max_value());
        let (a, _) = solve_spr_alternating(&p.with_upper(u_star)?)?;
        let (b, _) = solve_spr_alternating(&p.with_upper(approx_upper(l, u, n_star + 3)?)?)?;
        dist = dist
            .max(sup_distance(a.x(), b.x())?)
            .max(sup_distance(a.k_plus(), b.k_plus())?)
            .max(sup_distance(a.k_minus(), b.k_minus())?);
        support = support.max(support_of(&a, l, u)).max(support_of(&b, l, u));
    }
    Ok(Outcome {
        pass: dist <= 1e-12 && excess == 0.0,
        detail: format!("100 instances, n* up to {max_n}, max distance {dist:.3e}, sup(U^n* - U) = {excess:e}"),
        support,
    })
}

fn criterion_4() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut upper_slack, mut lower_slack, mut support) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0.0f64);
    for seed in 0..200 {
        let p = generate_instance(20_000 + seed, &GeneratorSpec::default())?;
        let grid = p.y().grid().clone();
        let delta = GridPath::new(grid.clone(), (0..grid.len()).map(|_| rng.random_range(0.0..=0.2)).collect())?;
        let (a, _) = solve_spr_alternating(&p)?;

        let u_tilde = p.upper().add(&delta)?;
        let (b, _) = solve_spr_alternating(&p.with_upper(u_tilde.clone())?)?;
        let (lhs, rhs) = upper_perturbation_bound(&a, &b, p.upper(), &u_tilde)?;
        upper_slack = lhs.values().iter().zip(rhs.values()).map(|(l, r)| l - r).fold(upper_slack, f64::max);
        support = support.max(support_of(&b, p.lower(), &u_tilde));

        let l_tilde = p.lower().sub(&delta)?;
        let (c, _) = solve_spr_alternating(&p.with_lower(l_tilde.clone())?)?;
        let (lhs, rhs) = lower_perturbation_bound(&a, &c, p.lower(), &l_tilde)?;
        lower_slack = lhs.values().iter().zip(rhs.values()).map(|(l, r)| l - r).fold(lower_slack, f64::max);
        support = support.max(support_of(&a, p.lower(), p.upper())).max(support_of(&c, &l_tilde, p.upper()));
    }
    Ok(Outcome {
        pass: upper_slack <= 1e-10 && lower_slack <= 1e-10,
        detail: format!("200 pairs, max lhs - rhs: upper {upper_slack:.3e}, lower {lower_slack:.3e}"),
        support,
    })
}

fn criterion_5() -> Result<Outcome> {
    let (mut dist, mut support) = (0.0f64, 0.0f64);
    for seed in 0..100 {
        let p = generate_instance(30_000 + seed, &GeneratorSpec::default())?;
        let (y, l) = (p.y(), p.lower());
        let reach = y.max_value() + (l.max_value() - y.min_value()).max(0.0) + 1.0;
        let upper = GridPath::constant(y.grid().clone(), reach)?;
        let q = SprProblem::new(y.clone(), l.clone(), upper.clone(), p.tol())?;
        let (sol, _) = solve_spr_alternating(&q)?;
        let mut running = 0.0f64;
        let closed: Vec<f64> = y
            .values()
            .iter()
            .zip(l.values())
            .map(|(y, l)| {
                running = running.max(l - y);
                y + running
            })
            .collect();
        let closed = GridPath::new(y.grid().clone(), closed)?;
        dist = dist.max(sup_distance(sol.x(), &closed)?).max(sol.k_minus().max_value());
        support = support.max(support_of(&sol, l, &upper));
    }
    Ok(Outcome {
        pass: dist <= 1e-14,
        detail: format!("100 instances, max distance to closed form {dist:.3e}"),
        support,
    })
}

fn ou_problem() -> Result<SdeProblem> {
    let g = Arc::new(TimeGrid::uniform(1.0, 1024)?);
    let barriers = BarrierPair::new(constant(&g, -1.0), constant(&g, 1.0))?;
    let coefficients = CoefficientSpec::LinearDrift { sigma: 0.2, slope: -1.0, offset: 0.0 }.build()?;
    SdeProblem::new(constant(&g, 0.0), coefficients, barriers, sample_brownian(&g, 42))
}

fn criterion_6() -> Result<Outcome> {
    let p = ou_problem()?;
    let start = Instant::now();
    let (sol, trace) = picard_solve(&p)?;
    let elapsed = start.elapsed();
    let ratios_ok = trace.ratios.iter().skip(2).all(|r| r.is_none_or(|r| r < 1.0));
    let report = contraction_report(&trace, 1.0, 1.0).ok();
    let fitted = report.and_then(|r| r.fitted_rho).map_or("n/a".into(), |rho| format!("{rho:.3}"));
    Ok(Outcome {
        pass: trace.converged
            && trace.last_residual() <= 1e-10
            && trace.iterations <= 30
            && ratios_ok
            && elapsed < Duration::from_secs(5),
        detail: format!(
            "{} iterations, last residual {:.3e}, ratios < 1 from n = 2: {ratios_ok}, fitted rho {fitted}, {:.3}s",
            trace.iterations,
            trace.last_residual(),
            elapsed.as_secs_f64()
        ),
        support: support_of(&sol, p.barriers().lower(), p.barriers().upper()),
    })
}

fn criterion_7() -> Result<Outcome> {
    let p = ou_problem()?;
    let (l, u) = (p.barriers().lower(), p.barriers().upper());
    let clamped = p.driver().zip_with(l, f64::max)?.zip_with(u, f64::min)?;
    let (a, _) = picard_solve(&p)?;
    let (b, _) = picard_solve_from(&p, &clamped)?;
    let d = sup_distance(a.x(), b.x())?;
    // Off-diagonal starts, since clamp(H) = H for this instance.
    let (c, _) = picard_solve_from(&p, l)?;
    let (e, _) = picard_solve_from(&p, u)?;
    let d_far = sup_distance(a.x(), c.x())?.max(sup_distance(a.x(), e.x())?);
    Ok(Outcome {
        pass: d <= 1e-9 && d_far <= 1e-9,
        detail: format!("H vs clamp(H) {d:.3e}; H vs X0 = L, X0 = U {d_far:.3e}"),
        support: [&a, &b, &c, &e].iter().map(|s| support_of(s, l, u)).fold(0.0, f64::max),
    })
}

fn criterion_8() -> Result<Outcome> {
    let (mut exact, mut r1_zero, mut support) = (true, true, 0.0f64);
    let spec = GeneratorSpec { steps: 200, ..Default::default() };
    let mut active = 0;
    for seed in 0..50 {
        let inst = generate_instance(40_000 + seed, &spec)?;
        let g = inst.y().grid().clone();
        let coefficients = CoefficientSpec::Constant { sigma: 0.0, drift: 0.0 }.build()?;
        let p = SdeProblem::new(inst.y().clone(), coefficients, inst.barriers().clone(), sample_brownian(&g, seed))?;
        let (sol, trace) = picard_solve(&p)?;
        let direct = solve_spr_separated(&inst)?;
        exact &= sol == direct && trace.iterations <= 2;
        r1_zero &= trace.residuals.get(1).is_none_or(|&r| r == 0.0);
        active += usize::from(trace.residuals[0] > 0.0);
        support = support.max(support_of(&sol, inst.lower(), inst.upper()));
    }
    Ok(Outcome {
        pass: exact && r1_zero,
        detail: format!("50 drivers ({active} leave the barriers), bitwise equal {exact}, r_1 = 0 {r1_zero}"),
        support,
    })
}

fn brownian_template(steps: usize, lower: f64, upper: f64) -> Result<SdeProblem> {
    let g = Arc::new(TimeGrid::uniform(1.0, steps)?);
    let barriers = BarrierPair::new(constant(&g, lower), constant(&g, upper))?;
    let coefficients = CoefficientSpec::Constant { sigma: 1.0, drift: 0.0 }.build()?;
    SdeProblem::new(GridPath::zeros(g.clone()), coefficients, barriers, GridPath::zeros(g))
}

fn criterion_9() -> Result<Outcome> {
    let start = Instant::now();
    let config = MonteCarloConfig::new(10_000, 9);
    let free = monte_carlo(&brownian_template(64, -1e6, 1e6)?, &config)?;
    let var = *free.variance.last().unwrap();

    let coarse = monte_carlo(&brownian_template(256, -1.0, 1.0)?, &config)?;
    let fine = monte_carlo(&brownian_template(512, -1.0, 1.0)?, &config)?;
    let elapsed = start.elapsed();
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
    let tv_change = rel(coarse.mean_total_variation, fine.mean_total_variation);
    let m2_change = rel(coarse.total_variation_second_moment, fine.total_variation_second_moment);
    let constraint = coarse.max_constraint_residual.max(fine.max_constraint_residual);
    let healthy = [&free, &coarse, &fine].iter().all(|s| s.failures() == 0 && s.verification_failures == 0);
    Ok(Outcome {
        pass: (0.95..=1.05).contains(&var)
            && constraint <= 1e-12
            && coarse.mean_total_variation.is_finite()
            && tv_change <= 0.2
            && m2_change <= 0.2
            && healthy
            && elapsed < Duration::from_secs(60),
        detail: format!(
            "Var(X_1) {var:.4}; reflected: constraint {constraint:.1e}, E[Var K] {:.4} -> {:.4} ({:.1}%), E[(Var K)^2] change {:.1}%, {:.1}s",
            coarse.mean_total_variation,
            fine.mean_total_variation,
            100.0 * tv_change,
            100.0 * m2_change,
            elapsed.as_secs_f64()
        ),
        support: [&free, &coarse, &fine].iter().map(|s| s.max_support_violation).fold(0.0, f64::max),
    })
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("oracle equivalence", criterion_1),
        ("reflection residuals", criterion_2),
        ("barrier stationarity", criterion_3),
        ("perturbation bounds", criterion_4),
        ("one-barrier reduction", criterion_5),
        ("Picard convergence", criterion_6),
        ("SDE uniqueness", criterion_7),
        ("degenerate reduction", criterion_8),
        ("Monte Carlo sanity", criterion_9),
    ];
    let mut failures = 0;
    let mut support = 0.0f64;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (pass, detail) = match run() {
            Ok(o) => {
                support = support.max(o.support);
                (o.pass, o.detail)
            }
            Err(e) => {
                support = f64::INFINITY;
                (false, format!("error: {e}"))
            }
        };
        failures += usize::from(!pass);
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    let pass = support <= 1e-10;
    failures += usize::from(!pass);
    println!(
        "{} 10 compensator support: max violation {support:.3e} over criteria 1-9",
        if pass { "PASS" } else { "FAIL" }
    );

    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
