//! Inverse-Gaussian fit of the normalised cost samples and the VaR / TVaR
//! based premium.

mod inverse_gaussian;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, Tolerance};

pub use inverse_gaussian::{
    fit_inverse_gaussian, fit_weighted, Family, FitSource, FittedDistribution, LAMBDA_CAP, MIN_SAMPLES,
};

/// Which reading of the VaR and TVaR definitions to apply.
///
/// `StandardCte` takes VaR as the level exceeded with probability α and TVaR
/// as the conditional mean above it. `PaperLiteral` takes VaR as the
/// α-quantile and TVaR as the mean excess over nominal above it, scaled by
/// `1/(1−α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    #[default]
    StandardCte,
    PaperLiteral,
}

impl Convention {
    pub fn as_str(&self) -> &'static str {
        match self {
            Convention::StandardCte => "standard_cte",
            Convention::PaperLiteral => "paper_literal",
        }
    }
}

const BISECT_TOL: f64 = 1e-10;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Validation(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Smallest `x` with `G(x) ≥ p`, by bisection.
fn quantile(dist: &FittedDistribution, p: f64, upper: bool) -> f64 {
    let sd = dist.variance().sqrt();
    let mut lo = 0.0;
    let mut hi = dist.mu + 10.0 * sd;
    // In the upper tail compare survival values directly to avoid 1 − p cancellation.
    let below = |x: f64| if upper { dist.survival(x) > 1.0 - p } else { dist.cdf(x) < p };
    while below(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > BISECT_TOL * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// VaR in normalised cost.
pub fn value_at_risk(dist: &FittedDistribution, alpha: f64, convention: Convention) -> Result<f64> {
    check_alpha(alpha)?;
    if dist.degenerate {
        return Ok(dist.mu);
    }
    Ok(match convention {
        Convention::StandardCte => quantile(dist, 1.0 - alpha, true),
        Convention::PaperLiteral => quantile(dist, alpha, false),
    })
}

/// TVaR in normalised cost (`StandardCte`) or normalised excess over nominal
/// (`PaperLiteral`).
pub fn tail_value_at_risk(dist: &FittedDistribution, alpha: f64, convention: Convention) -> Result<f64> {
    let var = value_at_risk(dist, alpha, convention)?;
    if dist.degenerate {
        return Ok(match convention {
            Convention::StandardCte => dist.mu,
            Convention::PaperLiteral => (dist.mu - 1.0) / (1.0 - alpha),
        });
    }
    let partial = dist.upper_partial_mean(var);
    let tail = dist.survival(var);
    Ok(match convention {
        Convention::StandardCte => partial / alpha,
        Convention::PaperLiteral => (partial - tail) / (1.0 - alpha),
    })
}

/// `∫_x^∞ t g(t) dt` by quadrature, for checking the closed form.
pub fn upper_partial_mean_quadrature(dist: &FittedDistribution, x: f64) -> Result<f64> {
    let sd = dist.variance().sqrt();
    let end = dist.mu + 60.0 * sd + 60.0 * dist.mu.powi(2) / dist.lambda;
    let cuts: Vec<f64> = (-8..=40).map(|k| dist.mu + k as f64 * 0.5 * sd).collect();
    integrate(
        |t| t * dist.pdf(t),
        x.max(0.0),
        end.max(x),
        &cuts,
        Tolerance {
            abs: 1e-12,
            rel: 0.0,
            max_intervals: 4_000,
        },
    )
    .require(1e-10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub alpha: f64,
    pub convention: Convention,
    pub nominal_cost: f64,
    /// Absent when α = 0 under `StandardCte`, where the threshold is unbounded.
    pub var_normalized: Option<f64>,
    pub var_currency: Option<f64>,
    pub tvar_normalized: Option<f64>,
    pub tvar_currency: Option<f64>,
    pub premium_normalized: f64,
    pub premium_currency: f64,
}

impl RiskReport {
    /// Builds a report from already computed measures; premium = α · TVaR.
    pub fn from_measures(alpha: f64, var: Option<f64>, tvar: Option<f64>, nominal_cost: f64, convention: Convention) -> Self {
        let premium = match tvar {
            Some(t) if alpha > 0.0 => alpha * t,
            _ => 0.0,
        };
        Self {
            alpha,
            convention,
            nominal_cost,
            var_normalized: var,
            var_currency: var.map(|v| v * nominal_cost),
            tvar_normalized: tvar,
            tvar_currency: tvar.map(|t| t * nominal_cost),
            premium_normalized: premium,
            premium_currency: premium * nominal_cost,
        }
    }

    pub fn summary(&self) -> String {
        let fmt = |x: Option<f64>, scale: f64| match x {
            Some(v) => format!("{:>10.4}% {:>12.4}", 100.0 * v, v * scale),
            None => format!("{:>11} {:>12}", "n/a", "n/a"),
        };
        let n = self.nominal_cost;
        format!(
            "convention {}  alpha {:.6}  nominal {:.4}\n  VaR     {}\n  TVaR    {}\n  Premium {}",
            self.convention.as_str(),
            self.alpha,
            n,
            fmt(self.var_normalized, n),
            fmt(self.tvar_normalized, n),
            fmt(Some(self.premium_normalized), n),
        )
    }
}

/// Prices cover for the fitted cost distribution at confidence `alpha`.
pub fn price_policy(dist: &FittedDistribution, alpha: f64, nominal_cost: f64, convention: Convention) -> Result<RiskReport> {
    if !(nominal_cost.is_finite() && nominal_cost > 0.0) {
        return Err(Error::Validation(format!("nominal cost must be positive, got {nominal_cost}")));
    }
    if alpha == 0.0 {
        let (var, tvar) = match convention {
            Convention::StandardCte => (None, None),
            Convention::PaperLiteral if dist.degenerate => (Some(dist.mu), Some(dist.mu - 1.0)),
            Convention::PaperLiteral => (Some(0.0), Some(dist.mu - 1.0)),
        };
        return Ok(RiskReport::from_measures(0.0, var, tvar, nominal_cost, convention));
    }
    let var = value_at_risk(dist, alpha, convention)?;
    let tvar = tail_value_at_risk(dist, alpha, convention)?;
    Ok(RiskReport::from_measures(alpha, Some(var), Some(tvar), nominal_cost, convention))
}

/// Reports over a list of α values, for plotting VaR / TVaR / premium curves.
pub fn price_curve(dist: &FittedDistribution, alphas: &[f64], nominal_cost: f64, convention: Convention) -> Result<Vec<RiskReport>> {
    alphas.iter().map(|&a| price_policy(dist, a, nominal_cost, convention)).collect()
}

pub fn write_curve_csv<W: Write>(reports: &[RiskReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "var", "tvar", "premium"])?;
    let cell = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in reports {
        w.write_record([
            r.alpha.to_string(),
            cell(r.var_normalized),
            cell(r.tvar_normalized),
            r.premium_normalized.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
