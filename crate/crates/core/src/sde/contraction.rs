use serde::Serialize;

use crate::error::{Error, Result};

use super::PicardTrace;

/// Informational fit of Picard residuals against a factorial envelope `c ρⁿ / n!`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub residuals: Vec<f64>,
    pub ratios: Vec<Option<f64>>,
    /// First `n` with `r_n = 0`, after which the scheme is stationary.
    pub exact_after: Option<usize>,
    pub fitted_c: Option<f64>,
    pub fitted_rho: Option<f64>,
    /// `ρ / T`, the fitted stand-in for the contraction constant `M`.
    pub implied_m: Option<f64>,
    /// Every residual in the second half of the run lies within a decade of the fitted envelope.
    pub eventually_dominated: bool,
    pub lambda: f64,
    pub horizon: f64,
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

pub fn contraction_report(trace: &PicardTrace, lambda: f64, horizon: f64) -> Result<ContractionReport> {
    let r = &trace.residuals;
    if r.len() < 3 {
        return Err(Error::TooFewResiduals { needed: 3, got: r.len() });
    }
    let exact_after = r.iter().position(|&v| v == 0.0);

    // log r_n + ln n! = ln c + n ln ρ, least squares over positive residuals
    let points: Vec<(f64, f64)> =
        r.iter().enumerate().filter(|(_, &v)| v > 0.0).map(|(n, &v)| (n as f64, v.ln() + ln_factorial(n))).collect();
    let fit = (points.len() >= 2).then(|| {
        let m = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
        let my = points.iter().map(|p| p.1).sum::<f64>() / m;
        let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let slope = sxy / sxx;
        (my - slope * mx, slope)
    });

    let eventually_dominated =
        match fit {
            Some((ln_c, ln_rho)) => r.iter().enumerate().skip(r.len() / 2).all(|(n, &v)| {
                v == 0.0 || v.ln() <= ln_c + n as f64 * ln_rho - ln_factorial(n) + std::f64::consts::LN_10
            }),
            None => exact_after.is_some(),
        };

    Ok(ContractionReport {
        residuals: r.clone(),
        ratios: trace.ratios.clone(),
        exact_after,
        fitted_c: fit.map(|f| f.0.exp()),
        fitted_rho: fit.map(|f| f.1.exp()),
        implied_m: fit.map(|f| f.1.exp() / horizon),
        eventually_dominated,
        lambda,
        horizon,
    })
}
