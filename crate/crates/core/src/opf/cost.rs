use crate::error::{Error, Result};

/// One curtailment compensation term `a (sqrt(D) - sqrt(D - c)) + b`.
pub fn curtailment_cost(a: f64, b: f64, demand: f64, curtail: f64) -> Result<f64> {
    if !(demand >= 0.0) {
        return Err(Error::Domain(format!("demand {demand} is negative")));
    }
    if !(curtail >= 0.0) {
        return Err(Error::Domain(format!("curtailment {curtail} is negative")));
    }
    if curtail > demand {
        return Err(Error::Domain(format!(
            "curtailment {curtail} exceeds demand {demand}"
        )));
    }
    Ok(a * (demand.sqrt() - (demand - curtail).sqrt()) + b)
}

/// The `a`-weighted part of [`curtailment_cost`] without domain checks;
/// curtailment is clamped into `[0, demand]`.
pub(crate) fn sqrt_term(a: f64, demand: f64, curtail: f64) -> f64 {
    let c = curtail.clamp(0.0, demand.max(0.0));
    a * (demand.max(0.0).sqrt() - (demand.max(0.0) - c).sqrt())
}

/// Chord interpolation of `c -> a (sqrt(D) - sqrt(D - c))` on `[0, gamma D]`
/// with `k` breakpoints spaced uniformly in `s = sqrt(D - c)`.
///
/// Returns `(breakpoints, slopes)`; the chord lies above the convex curve and
/// touches it at every breakpoint.
pub fn curtailment_segments(a: f64, demand: f64, gamma: f64, k: usize) -> (Vec<f64>, Vec<f64>) {
    let k = k.max(1);
    let s0 = demand.sqrt();
    let s_min = ((1.0 - gamma) * demand).max(0.0).sqrt();
    let h = (s0 - s_min) / k as f64;
    let mut bps: Vec<f64> = (0..=k)
        .map(|j| {
            let s = s0 - h * j as f64;
            demand - s * s
        })
        .collect();
    bps[0] = 0.0;
    bps[k] = gamma * demand;
    let slopes = bps.windows(2).map(|w| a * h / (w[1] - w[0])).collect();
    (bps, slopes)
}

/// Largest vertical gap between the chord interpolant and the curve over
/// one segment `[c0, c1]`.
pub fn segment_error_bound(a: f64, demand: f64, c0: f64, c1: f64) -> f64 {
    // The gap f_chord - f is concave; its maximum sits where f' equals the chord slope.
    let f = |c: f64| sqrt_term(a, demand, c);
    let slope = (f(c1) - f(c0)) / (c1 - c0);
    if a == 0.0 || slope <= 0.0 {
        return 0.0;
    }
    // f'(c) = a / (2 sqrt(D - c))  =>  c* = D - (a / (2 slope))^2
    let c_star = (demand - (a / (2.0 * slope)).powi(2)).clamp(c0, c1);
    f(c0) + slope * (c_star - c0) - f(c_star)
}
