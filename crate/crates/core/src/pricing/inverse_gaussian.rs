use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::normal;

/// Shape reported for zero-variance sample sets.
pub const LAMBDA_CAP: f64 = 1e12;
pub const MIN_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    InverseGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitSource {
    McOnly,
    McPlusWorstCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FittedDistribution {
    pub family: Family,
    pub mu: f64,
    pub lambda: f64,
    pub source: FitSource,
    pub samples: usize,
    /// Set when the samples carry no spread; risk measures then treat the
    /// distribution as a point mass at `mu`.
    pub degenerate: bool,
}

impl FittedDistribution {
    pub fn new(mu: f64, lambda: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0 && lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Fit(format!("inverse Gaussian needs mu > 0 and lambda > 0, got {mu}, {lambda}")));
        }
        Ok(Self {
            family: Family::InverseGaussian,
            mu,
            lambda,
            source: FitSource::McOnly,
            samples: 0,
            degenerate: false,
        })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (mu, lam) = (self.mu, self.lambda);
        (lam / (2.0 * std::f64::consts::PI * x * x * x)).sqrt() * (-lam * (x - mu).powi(2) / (2.0 * mu * mu * x)).exp()
    }

    /// Closed-form CDF; the second normal term is combined in log space so
    /// that large shapes do not overflow `exp(2λ/μ)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let r = (self.lambda / x).sqrt();
        let a = normal::cdf(r * (x / self.mu - 1.0));
        let b = (2.0 * self.lambda / self.mu + normal::ln_cdf(-r * (x / self.mu + 1.0))).exp();
        (a + b).min(1.0)
    }

    /// `∫_x^∞ t g(t) dt`.
    pub fn upper_partial_mean(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return self.mu;
        }
        let r = (self.lambda / x).sqrt();
        // 1 − Φ(z) written as Φ(−z) to keep precision in the upper tail.
        let a = normal::cdf(-r * (x / self.mu - 1.0));
        let b = (2.0 * self.lambda / self.mu + normal::ln_cdf(-r * (x / self.mu + 1.0))).exp();
        self.mu * (a + b).max(0.0)
    }

    /// `1 − G(x)`, accurate in the upper tail.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let r = (self.lambda / x).sqrt();
        let a = normal::cdf(-r * (x / self.mu - 1.0));
        let b = (2.0 * self.lambda / self.mu + normal::ln_cdf(-r * (x / self.mu + 1.0))).exp();
        (a - b).max(0.0)
    }

    pub fn variance(&self) -> f64 {
        self.mu.powi(3) / self.lambda
    }
}

/// Maximum-likelihood inverse-Gaussian fit to normalised costs, optionally
/// augmented with the worst-case point carrying weight `worst_weight`.
pub fn fit_inverse_gaussian(samples: &[f64], worst: Option<f64>) -> Result<FittedDistribution> {
    fit_weighted(samples, worst, 1.0)
}

pub fn fit_weighted(samples: &[f64], worst: Option<f64>, worst_weight: f64) -> Result<FittedDistribution> {
    if let Some(&bad) = samples.iter().chain(worst.iter()).find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::Fit(format!("samples must be positive and finite, found {bad}")));
    }
    if !(worst_weight.is_finite() && worst_weight >= 0.0) {
        return Err(Error::Fit(format!("worst-case weight must be non-negative, got {worst_weight}")));
    }
    let mut points: Vec<(f64, f64)> = samples.iter().map(|&x| (x, 1.0)).collect();
    if let Some(w) = worst {
        points.push((w, worst_weight));
    }
    let total: f64 = points.iter().map(|p| p.1).sum();
    if points.is_empty() || total <= 0.0 {
        return Err(Error::Fit("no samples to fit".into()));
    }
    let mu = points.iter().map(|(x, w)| w * x).sum::<f64>() / total;
    let spread = points.iter().map(|(x, w)| w * (1.0 / x - 1.0 / mu)).sum::<f64>() / total;
    let all_equal = points.iter().all(|(x, _)| (x - mu).abs() <= 1e-12 * mu);

    let source = if worst.is_some() { FitSource::McPlusWorstCase } else { FitSource::McOnly };
    let degenerate = all_equal || spread <= 0.0 || 1.0 / spread > LAMBDA_CAP;
    if !degenerate && samples.len() < MIN_SAMPLES {
        return Err(Error::Fit(format!(
            "at least {MIN_SAMPLES} samples are needed for a fit, got {}",
            samples.len()
        )));
    }
    if degenerate {
        log::warn!("degenerate fit: samples have no spread around {mu}; shape capped at {LAMBDA_CAP:e}");
    }
    Ok(FittedDistribution {
        family: Family::InverseGaussian,
        mu,
        lambda: if degenerate { LAMBDA_CAP } else { 1.0 / spread },
        source,
        samples: points.len(),
        degenerate,
    })
}
