use serde::Serialize;

use super::{build_opf_with, solve, Demand, OpfOptions};
use crate::error::{Error, Result};
use crate::network::NetworkModel;

/// Outcome of the one-time incentive computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Incentive {
    /// `b` is the system-level saving; `per_bus` splits it evenly.
    Value {
        b: f64,
        per_bus: f64,
        cost_with: f64,
        cost_without: f64,
        gamma_min: f64,
    },
    /// Curtailment under compensation costs more than the uncompensated
    /// baseline: users would have to pay to join.
    Infeasible { cost_with: f64, cost_without: f64, gamma_min: f64 },
}

impl Incentive {
    pub fn value(&self) -> Option<f64> {
        match self {
            Incentive::Value { b, .. } => Some(*b),
            Incentive::Infeasible { .. } => None,
        }
    }
}

fn cost_at(model: &NetworkModel, gamma: f64, a: f64, demand: Option<&Demand>, opts: &OpfOptions) -> Result<f64> {
    let mut m = model.clone();
    m.policy.curtail_fraction_max = gamma;
    m.policy.curtail_penalty = a;
    m.policy.one_time_incentive = 0.0;
    solve(&build_opf_with(&m, demand, opts)?).map(|d| d.cost_total)
}

/// Smallest curtailment fraction (to `1e-6`) that keeps the OPF feasible.
pub fn minimal_curtailment_fraction(model: &NetworkModel, opts: &OpfOptions) -> Result<f64> {
    let feasible = |g: f64| match cost_at(model, g, 0.0, None, opts) {
        Ok(_) => Ok(true),
        Err(Error::Infeasible(_)) => Ok(false),
        Err(e) => Err(e),
    };
    if feasible(0.0)? {
        return Ok(0.0);
    }
    let mut hi = model.policy.curtail_fraction_max;
    if !feasible(hi)? {
        return Err(Error::Infeasible(format!(
            "OPF is infeasible even at the maximum curtailment fraction {hi}"
        )));
    }
    let mut lo = 0.0;
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Cost saved by the curtailment programme.
///
/// The baseline solves with curtailment restricted to the minimal feasible
/// fraction and left uncompensated; the programme solve uses the model's
/// fraction and penalty, both without any incentive. A strictly negative
/// saving yields [`Incentive::Infeasible`].
pub fn compute_one_time_incentive(model: &NetworkModel) -> Result<Incentive> {
    let opts = OpfOptions::default();
    let gamma_min = minimal_curtailment_fraction(model, &opts)?;
    let cost_without = cost_at(model, gamma_min, 0.0, None, &opts)?;
    let cost_with = cost_at(model, model.policy.curtail_fraction_max, model.policy.curtail_penalty, None, &opts)?;
    let gap = cost_without - cost_with;
    let tol = 1e-9 * cost_without.abs().max(1.0);
    if gap < -tol {
        return Ok(Incentive::Infeasible { cost_with, cost_without, gamma_min });
    }
    let b = if gap <= tol { 0.0 } else { gap };
    let participants = model.curtailment_participants().max(1);
    Ok(Incentive::Value {
        b,
        per_bus: b / participants as f64,
        cost_with,
        cost_without,
        gamma_min,
    })
}
