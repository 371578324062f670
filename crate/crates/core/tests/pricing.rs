use gridsure::pricing::{
    fit_inverse_gaussian, fit_weighted, price_curve, price_policy, tail_value_at_risk, upper_partial_mean_quadrature,
    value_at_risk, write_curve_csv, Convention, FitSource, FittedDistribution, LAMBDA_CAP, MIN_SAMPLES,
};
use gridsure::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, InverseGaussian};

fn ig(mu: f64, lambda: f64) -> FittedDistribution {
    FittedDistribution::new(mu, lambda).unwrap()
}

fn draws(mu: f64, lambda: f64, n: usize, seed: u64) -> Vec<f64> {
    let d = InverseGaussian::new(mu, lambda).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| d.sample(&mut rng)).collect()
}

const ALPHAS: [f64; 10] = [0.01, 0.02, 0.04, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9];

#[test]
fn identical_samples_give_a_degenerate_fit() {
    let f = fit_inverse_gaussian(&[1.0; 50], None).unwrap();
    assert!(f.degenerate);
    assert_eq!(f.mu, 1.0);
    assert_eq!(f.lambda, LAMBDA_CAP);
    assert_eq!(f.source, FitSource::McOnly);
    // a point mass needs no minimum sample count
    assert!(fit_inverse_gaussian(&[1.0], None).unwrap().degenerate);
}

#[test]
fn degenerate_fit_prices_at_the_point_mass() {
    let f = fit_inverse_gaussian(&[1.0; 40], None).unwrap();
    let r = price_policy(&f, 0.05, 10.0, Convention::StandardCte).unwrap();
    assert_eq!(r.var_normalized, Some(1.0));
    assert_eq!(r.tvar_normalized, Some(1.0));
    let r = price_policy(&f, 0.05, 10.0, Convention::PaperLiteral).unwrap();
    assert_eq!(r.tvar_normalized, Some(0.0));
    assert_eq!(r.premium_currency, 0.0);
}

#[test]
fn too_few_or_bad_samples_are_rejected() {
    let few: Vec<f64> = (0..MIN_SAMPLES - 1).map(|k| 1.0 + 0.01 * k as f64).collect();
    assert!(matches!(fit_inverse_gaussian(&few, None), Err(Error::Fit(_))));
    let mut enough = few.clone();
    enough.push(1.5);
    assert!(fit_inverse_gaussian(&enough, None).is_ok());
    enough[3] = 0.0;
    assert!(matches!(fit_inverse_gaussian(&enough, None), Err(Error::Fit(_))));
    enough[3] = -1.0;
    assert!(fit_inverse_gaussian(&enough, None).is_err());
    assert!(fit_inverse_gaussian(&[], None).is_err());
    assert!(fit_inverse_gaussian(&enough[..5], Some(f64::NAN)).is_err());
    assert!(FittedDistribution::new(0.0, 1.0).is_err());
    assert!(FittedDistribution::new(1.0, -1.0).is_err());
}

#[test]
fn fit_is_the_maximum_likelihood_estimate() {
    let xs: Vec<f64> = (0..40).map(|k| 0.8 + 0.01 * k as f64).collect();
    let f = fit_inverse_gaussian(&xs, None).unwrap();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let inv = xs.iter().map(|x| 1.0 / x - 1.0 / mean).sum::<f64>() / xs.len() as f64;
    assert!((f.mu - mean).abs() < 1e-15);
    assert!((f.lambda - 1.0 / inv).abs() < 1e-9 * f.lambda);
    assert_eq!(f.samples, 40);
}

#[test]
fn worst_case_point_is_appended() {
    let xs = std::iter::repeat_n([0.95, 1.0, 1.05], 20).flatten().collect::<Vec<_>>();
    let plain = fit_inverse_gaussian(&xs, None).unwrap();
    let with = fit_inverse_gaussian(&xs, Some(1.3)).unwrap();
    assert_eq!(with.source, FitSource::McPlusWorstCase);
    assert_eq!(with.samples, xs.len() + 1);
    let mut manual = xs.clone();
    manual.push(1.3);
    let appended = fit_inverse_gaussian(&manual, None).unwrap();
    assert!((with.mu - appended.mu).abs() < 1e-15);
    assert!((with.lambda - appended.lambda).abs() < 1e-9 * appended.lambda);
    // an outlier widens the fit
    assert!(with.lambda < plain.lambda);
    let heavy = fit_weighted(&xs, Some(1.3), 10.0).unwrap();
    assert!(heavy.lambda < with.lambda);
    let ignored = fit_weighted(&xs, Some(1.3), 0.0).unwrap();
    assert!((ignored.mu - plain.mu).abs() < 1e-15);
}

#[test]
fn central_quantile_is_near_the_mean() {
    let f = ig(1.0, 500.0);
    for c in [Convention::StandardCte, Convention::PaperLiteral] {
        let v = value_at_risk(&f, 0.5, c).unwrap();
        assert!((v - 1.0).abs() < 0.02, "{v}");
    }
}

#[test]
fn var_moves_with_alpha_in_opposite_directions() {
    let f = ig(1.0147, 287.67);
    let std: Vec<f64> = ALPHAS.iter().map(|&a| value_at_risk(&f, a, Convention::StandardCte).unwrap()).collect();
    let lit: Vec<f64> = ALPHAS.iter().map(|&a| value_at_risk(&f, a, Convention::PaperLiteral).unwrap()).collect();
    assert!(std.windows(2).all(|w| w[1] < w[0]), "{std:?}");
    assert!(lit.windows(2).all(|w| w[1] > w[0]), "{lit:?}");
    // below the median the upper quantile sits above the lower one
    for (k, &a) in ALPHAS.iter().enumerate().filter(|(_, a)| **a < 0.5) {
        assert!(std[k] > lit[k], "alpha {a}");
    }
}

#[test]
fn var_is_the_stated_quantile() {
    let f = ig(0.9994, 22.5967);
    for &a in &ALPHAS {
        let up = value_at_risk(&f, a, Convention::StandardCte).unwrap();
        assert!((f.survival(up) - a).abs() < 1e-9, "alpha {a}");
        let lo = value_at_risk(&f, a, Convention::PaperLiteral).unwrap();
        assert!((f.cdf(lo) - a).abs() < 1e-9, "alpha {a}");
    }
}

#[test]
fn tail_mean_exceeds_var() {
    for f in [ig(1.0, 25.0), ig(1.0147, 287.67), ig(0.9994, 22.5967)] {
        for &a in &ALPHAS {
            let var = value_at_risk(&f, a, Convention::StandardCte).unwrap();
            let tvar = tail_value_at_risk(&f, a, Convention::StandardCte).unwrap();
            assert!(tvar >= var, "alpha {a}: {tvar} < {var}");
        }
    }
}

#[test]
fn alpha_outside_the_unit_interval_is_rejected() {
    let f = ig(1.0, 25.0);
    for a in [-0.1, 1.0, 1.5, f64::NAN] {
        assert!(value_at_risk(&f, a, Convention::StandardCte).is_err());
    }
    assert!(price_policy(&f, 0.05, 0.0, Convention::StandardCte).is_err());
}

#[test]
fn alpha_zero_means_no_premium() {
    let f = ig(1.0, 25.0);
    let r = price_policy(&f, 0.0, 50.0, Convention::StandardCte).unwrap();
    assert_eq!(r.premium_currency, 0.0);
    assert!(r.var_normalized.is_none());
    let r = price_policy(&f, 0.0, 50.0, Convention::PaperLiteral).unwrap();
    assert_eq!(r.premium_currency, 0.0);
}

#[test]
fn density_integrates_to_one() {
    for f in [ig(1.0, 25.0), ig(1.0147, 287.67), ig(0.9994, 22.5967), ig(2.0, 0.5)] {
        let n = 2_000_000;
        let end = 40.0 * f.mu + 60.0 * f.mu * f.mu / f.lambda;
        let h = end / n as f64;
        let total: f64 = (1..n).map(|k| f.pdf(k as f64 * h)).sum::<f64>() * h + 0.5 * h * f.pdf(end);
        assert!((total - 1.0).abs() < 1e-6, "mu {} lambda {}: {total}", f.mu, f.lambda);
    }
}

#[test]
fn partial_mean_matches_quadrature() {
    for f in [ig(1.0, 25.0), ig(1.0147, 287.67), ig(0.9994, 22.5967)] {
        for x in [0.0, 0.5, 0.9, 1.0, 1.1, 1.3, 1.6] {
            let a = f.upper_partial_mean(x);
            let b = upper_partial_mean_quadrature(&f, x).unwrap();
            assert!((a - b).abs() < 1e-9, "x {x}: {a} vs {b}");
        }
    }
}

#[test]
fn tail_mean_matches_simulation() {
    let f = ig(1.0, 25.0);
    let xs = draws(1.0, 25.0, 10_000_000, 77);
    for a in [0.01, 0.05, 0.2] {
        let var = value_at_risk(&f, a, Convention::StandardCte).unwrap();
        let tail: Vec<f64> = xs.iter().copied().filter(|&x| x > var).collect();
        let empirical = tail.iter().sum::<f64>() / tail.len() as f64;
        let tvar = tail_value_at_risk(&f, a, Convention::StandardCte).unwrap();
        assert!(((tvar - empirical) / empirical).abs() < 0.005, "alpha {a}: {tvar} vs {empirical}");
        let frac = tail.len() as f64 / xs.len() as f64;
        assert!((frac - a).abs() < 4.0 * (a * (1.0 - a) / xs.len() as f64).sqrt(), "alpha {a}: {frac}");
    }
}

#[test]
fn literal_tvar_is_scaled_mean_excess() {
    let f = ig(1.0147, 287.67);
    let a = 0.0398;
    let var = value_at_risk(&f, a, Convention::PaperLiteral).unwrap();
    let tvar = tail_value_at_risk(&f, a, Convention::PaperLiteral).unwrap();
    let excess = upper_partial_mean_quadrature(&f, var).unwrap() - f.survival(var);
    assert!((tvar - excess / (1.0 - a)).abs() < 1e-9);
}

#[test]
fn curve_has_one_row_per_alpha() {
    let f = ig(1.0, 25.0);
    let rows = price_curve(&f, &ALPHAS, 10.0, Convention::StandardCte).unwrap();
    assert_eq!(rows.len(), ALPHAS.len());
    let mut buf = Vec::new();
    write_curve_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,var,tvar,premium"));
    assert_eq!(lines.count(), ALPHAS.len());
}

#[test]
fn summary_mentions_every_measure() {
    let r = price_policy(&ig(1.0, 25.0), 0.05, 62.33, Convention::StandardCte).unwrap();
    let s = r.summary();
    for key in ["VaR", "TVaR", "Premium", "standard_cte"] {
        assert!(s.contains(key), "{s}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn premium_is_alpha_times_tvar(mu in 0.5f64..2.0, lambda in 5.0f64..500.0, alpha in 0.005f64..0.5, nominal in 1.0f64..1000.0) {
        let f = ig(mu, lambda);
        for c in [Convention::StandardCte, Convention::PaperLiteral] {
            let r = price_policy(&f, alpha, nominal, c).unwrap();
            let tvar = r.tvar_normalized.unwrap();
            prop_assert!((r.premium_normalized - alpha * tvar).abs() <= 1e-12 * tvar.abs().max(1.0));
            prop_assert!((r.premium_currency - r.premium_normalized * nominal).abs() <= 1e-9 * nominal);
            prop_assert!((r.var_currency.unwrap() - r.var_normalized.unwrap() * nominal).abs() <= 1e-9 * nominal);
        }
    }

    #[test]
    fn cdf_is_monotone_and_complements_survival(mu in 0.5f64..2.0, lambda in 0.5f64..1000.0, x in 0.01f64..5.0, dx in 0.0f64..1.0) {
        let f = ig(mu, lambda);
        prop_assert!(f.cdf(x) <= f.cdf(x + dx) + 1e-15);
        prop_assert!((f.cdf(x) + f.survival(x) - 1.0).abs() < 1e-12);
    }
}
