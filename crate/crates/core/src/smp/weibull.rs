use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::gamma;

/// Weibull holding-time distribution, `F(τ) = 1 − exp(−(τ/λ)^β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    /// λ, in hours once loaded.
    pub scale: f64,
    /// β.
    pub shape: f64,
}

impl WeibullParams {
    pub fn new(scale: f64, shape: f64) -> Result<Self> {
        let p = Self { scale, shape };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0 && self.shape.is_finite() && self.shape > 0.0) {
            return Err(Error::Validation(format!(
                "Weibull parameters must be positive and finite, got scale {} shape {}",
                self.scale, self.shape
            )));
        }
        Ok(())
    }

    pub fn cdf(&self, tau: f64) -> f64 {
        -(-(tau / self.scale).powf(self.shape)).exp_m1()
    }

    pub fn survival(&self, tau: f64) -> f64 {
        (-(tau / self.scale).powf(self.shape)).exp()
    }

    pub fn pdf(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return if self.shape == 1.0 && tau == 0.0 { 1.0 / self.scale } else { 0.0 };
        }
        let z = tau / self.scale;
        self.shape / self.scale * z.powf(self.shape - 1.0) * (-z.powf(self.shape)).exp()
    }

    /// Mean holding time, `λ Γ(1 + 1/β)`.
    pub fn mean(&self) -> f64 {
        self.scale * gamma(1.0 + 1.0 / self.shape)
    }

    /// Time at which the survival function falls to `eps`.
    pub fn horizon(&self, eps: f64) -> f64 {
        self.scale * (-eps.ln()).powf(1.0 / self.shape)
    }

    pub(crate) fn quantile(&self, q: f64) -> f64 {
        self.scale * (-(-q).ln_1p()).powf(1.0 / self.shape)
    }
}

/// Weibull CDF at `tau`; negative times are a domain error.
pub fn weibull_cdf(p: WeibullParams, tau: f64) -> Result<f64> {
    p.validate()?;
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::Domain(format!("transition time must be non-negative, got {tau}")));
    }
    Ok(p.cdf(tau))
}
