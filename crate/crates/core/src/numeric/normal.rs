//! Standard normal distribution helpers.

use libm::erfc;
use std::f64::consts::{PI, SQRT_2};

/// Standard normal CDF.
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

/// `ln Φ(z)`, accurate far into the lower tail.
pub fn ln_cdf(z: f64) -> f64 {
    if z > -30.0 {
        return (0.5 * erfc(-z / SQRT_2)).ln();
    }
    // Asymptotic expansion of the Mills ratio for z -> -inf.
    let x = -z;
    let x2 = x * x;
    let series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2);
    -0.5 * x2 - x.ln() - 0.5 * (2.0 * PI).ln() + series.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((cdf(0.0) - 0.5).abs() < 1e-16);
        let got = cdf(1.96);
        assert!((got - 0.975_002_104_851_779_6).abs() < 4e-16, "{got:e}");
        assert!((cdf(-3.0) - 0.001_349_898_031_630_093_3).abs() < 1e-17);
    }

    #[test]
    fn log_tail_is_continuous_at_switch() {
        let below = ln_cdf(-30.0 - 1e-9);
        let above = ln_cdf(-30.0 + 1e-9);
        assert!((below - above).abs() < 1e-6, "{below} {above}");
        // value from the closed form for extreme arguments stays finite
        assert!(ln_cdf(-1e3).is_finite());
    }
}
