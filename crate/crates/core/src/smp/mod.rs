//! Steady-state failure probability of the five-state attack lifecycle
//! (Good, Vulnerability, Detection, Containment, Failure) with Weibull
//! holding times.

mod spec;
mod weibull;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{integrate, Tolerance};

pub use spec::{load_smp_spec, parse_smp_spec, SmpSpec, Transition};
pub use weibull::{weibull_cdf, WeibullParams};

/// Survival level at which improper integrals are truncated.
const TAIL_EPS: f64 = 1e-14;
/// Largest accepted quadrature error estimate.
const QUAD_LIMIT: f64 = 1e-8;
const QUAD_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 0.0,
    max_intervals: 4_000,
};

pub const STATES: [&str; 5] = ["G", "V", "D", "C", "F"];

/// How the second factor of the Vulnerability sojourn integrand is read:
/// the V→F survival function or the V→F density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SojournReading {
    #[default]
    Survival,
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelLimits {
    pub gv: f64,
    pub vd: f64,
    pub vf: f64,
    pub dc: f64,
    pub cg: f64,
    pub fg: f64,
}

impl KernelLimits {
    /// Embedded-chain transition matrix, rows and columns in G, V, D, C, F order.
    pub fn matrix(&self) -> [[f64; 5]; 5] {
        let mut k = [[0.0; 5]; 5];
        k[0][1] = self.gv;
        k[1][2] = self.vd;
        k[1][4] = self.vf;
        k[2][3] = self.dc;
        k[3][0] = self.cg;
        k[4][0] = self.fg;
        k
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmpResult {
    pub kernel_limits: KernelLimits,
    pub emc_pi: [f64; 5],
    pub sojourn: [f64; 5],
    pub state_probs: [f64; 5],
    pub p_fail: f64,
    pub reading: SojournReading,
}

fn breakpoints(ps: &[WeibullParams]) -> Vec<f64> {
    let mut cuts = Vec::new();
    for p in ps {
        for q in [1e-9, 1e-4, 0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99, 0.9999, 1.0 - 1e-9] {
            cuts.push(p.quantile(q));
        }
    }
    cuts
}

/// `∫₀^∞ F̄_competitor dF_first`: probability that `first` fires before `competitor`.
pub fn competing_kernel(first: WeibullParams, competitor: WeibullParams) -> Result<f64> {
    first.validate()?;
    competitor.validate()?;
    let end = first.horizon(TAIL_EPS).min(competitor.horizon(TAIL_EPS));
    integrate(
        |t| first.pdf(t) * competitor.survival(t),
        0.0,
        end,
        &breakpoints(&[first, competitor]),
        QUAD_TOL,
    )
    .require(QUAD_LIMIT)
}

/// Mean holding time of a single-exit state, `λ Γ(1 + 1/β)`.
pub fn sojourn_time(p: WeibullParams) -> Result<f64> {
    p.validate()?;
    Ok(p.mean())
}

/// `∫₀^∞ F̄ dτ` by quadrature, as a check on [`sojourn_time`].
pub fn sojourn_time_quadrature(p: WeibullParams) -> Result<f64> {
    p.validate()?;
    integrate(|t| p.survival(t), 0.0, p.horizon(TAIL_EPS), &breakpoints(&[p]), QUAD_TOL).require(QUAD_LIMIT)
}

/// Sojourn in a state with two competing exits `a` and `b`.
pub fn competing_sojourn(a: WeibullParams, b: WeibullParams, reading: SojournReading) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    match reading {
        SojournReading::Survival => {
            let end = a.horizon(TAIL_EPS).min(b.horizon(TAIL_EPS));
            integrate(|t| a.survival(t) * b.survival(t), 0.0, end, &breakpoints(&[a, b]), QUAD_TOL)
                .require(QUAD_LIMIT)
        }
        SojournReading::Density => competing_kernel(b, a),
    }
}

/// Stationary vector of the embedded chain, `v = v K(∞)` with `Σ v = 1`.
pub fn solve_emc(k: &KernelLimits) -> Result<[f64; 5]> {
    let values = [k.gv, k.vd, k.vf, k.dc, k.cg, k.fg];
    if values.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > 1.0 + 1e-9) {
        return Err(Error::Validation(format!("kernel limits must lie in [0, 1], got {k:?}")));
    }
    let m = k.matrix();
    for (i, row) in m.iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Validation(format!(
                "kernel row {} sums to {sum}, expected 1",
                STATES[i]
            )));
        }
    }
    // (Kᵀ − I) v = 0 with the last balance equation replaced by Σ v = 1.
    let mut a = [[0.0; 6]; 5];
    for i in 0..5 {
        for j in 0..5 {
            a[i][j] = m[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[4] = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
    for col in 0..5 {
        let pivot = (col..5)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap_or(col);
        if a[pivot][col].abs() < 1e-12 {
            return Err(Error::SingularChain);
        }
        a.swap(col, pivot);
        for r in 0..5 {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..6 {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
    }
    let mut v = [0.0; 5];
    for i in 0..5 {
        v[i] = (a[i][5] / a[i][i]).max(0.0);
    }
    let total: f64 = v.iter().sum();
    for x in &mut v {
        *x /= total;
    }
    Ok(v)
}

pub fn failure_probability(spec: &SmpSpec) -> Result<SmpResult> {
    failure_probability_with(spec, SojournReading::Survival)
}

pub fn failure_probability_with(spec: &SmpSpec, reading: SojournReading) -> Result<SmpResult> {
    spec.validate()?;
    let vd = competing_kernel(spec.vd, spec.vf)?;
    let vf = competing_kernel(spec.vf, spec.vd)?;
    let kernel_limits = KernelLimits {
        gv: 1.0,
        vd,
        vf,
        dc: 1.0,
        cg: 1.0,
        fg: 1.0,
    };
    let emc_pi = solve_emc(&kernel_limits)?;
    let sojourn = [
        sojourn_time(spec.gv)?,
        competing_sojourn(spec.vd, spec.vf, reading)?,
        sojourn_time(spec.dc)?,
        sojourn_time(spec.cg)?,
        sojourn_time(spec.fg)?,
    ];
    let weight: f64 = emc_pi.iter().zip(&sojourn).map(|(v, t)| v * t).sum();
    let mut state_probs = [0.0; 5];
    for n in 0..5 {
        state_probs[n] = emc_pi[n] * sojourn[n] / weight;
    }
    log::debug!("kernel {kernel_limits:?} emc {emc_pi:?} sojourn {sojourn:?}");
    Ok(SmpResult {
        kernel_limits,
        emc_pi,
        sojourn,
        state_probs,
        p_fail: state_probs[4],
        reading,
    })
}

/// P_F over `n` evenly spaced values of one transition's scale λ.
pub fn sweep(
    spec: &SmpSpec,
    transition: Transition,
    lo: f64,
    hi: f64,
    n: usize,
    reading: SojournReading,
) -> Result<Vec<(f64, SmpResult)>> {
    if n == 0 || !(lo > 0.0 && hi >= lo) {
        return Err(Error::Validation(format!(
            "sweep needs 0 < lo <= hi and at least one point, got lo {lo} hi {hi} n {n}"
        )));
    }
    (0..n)
        .map(|i| {
            let x = if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            let mut s = spec.clone();
            s.get_mut(transition).scale = x;
            failure_probability_with(&s, reading).map(|r| (x, r))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(scale: f64, shape: f64) -> WeibullParams {
        WeibullParams { scale, shape }
    }

    #[test]
    fn cdf_at_scale() {
        let want = 1.0 - (-1.0f64).exp();
        for beta in [0.5, 1.0, 3.0, 400.0] {
            assert!((weibull_cdf(w(2.5, beta), 2.5).unwrap() - want).abs() < 1e-15);
        }
        assert_eq!(weibull_cdf(w(1.0, 2.0), 0.0).unwrap(), 0.0);
        assert!(weibull_cdf(w(1.0, 2.0), -1.0).is_err());
    }

    #[test]
    fn identical_competitors_split_evenly() {
        for p in [w(1.0, 1.0), w(2.0675, 18.8178), w(0.7, 400.0)] {
            assert!((competing_kernel(p, p).unwrap() - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn silent_competitor_never_wins() {
        let k = competing_kernel(w(1.9293, 16.0712), w(1e9, 1.0)).unwrap();
        assert!((k - 1.0).abs() < 1e-6, "{k}");
    }

    #[test]
    fn exponential_sojourns() {
        assert!((sojourn_time(w(3.0, 1.0)).unwrap() - 3.0).abs() < 1e-12);
        let half_root_pi = std::f64::consts::PI.sqrt() / 2.0;
        assert!((sojourn_time(w(1.0, 2.0)).unwrap() - half_root_pi).abs() < 1e-12);
    }

    #[test]
    fn cycles_without_branching() {
        let mut k = KernelLimits { gv: 1.0, vd: 1.0, vf: 0.0, dc: 1.0, cg: 1.0, fg: 1.0 };
        let v = solve_emc(&k).unwrap();
        for (got, want) in v.iter().zip([0.25, 0.25, 0.25, 0.25, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        k.vd = 0.0;
        k.vf = 1.0;
        let v = solve_emc(&k).unwrap();
        let third = 1.0 / 3.0;
        for (got, want) in v.iter().zip([third, third, 0.0, 0.0, third]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn malformed_kernel_is_rejected() {
        let k = KernelLimits { gv: 1.0, vd: 0.5, vf: 0.2, dc: 1.0, cg: 1.0, fg: 1.0 };
        assert!(solve_emc(&k).is_err());
        let k = KernelLimits { gv: 0.0, vd: 1.0, vf: 0.0, dc: 1.0, cg: 1.0, fg: 1.0 };
        assert!(solve_emc(&k).is_err());
    }
}
