//! Load-variation scenarios: Monte Carlo sampling inside the (δ, Δ)
//! polytope, worst-case search over its vertices, and hand-built attacks.

mod laa;
mod monte_carlo;
mod worst_case;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkModel;
use crate::opf::Demand;

pub use laa::apply_laa;
pub use monte_carlo::{read_samples_csv, run_monte_carlo, write_samples_csv, CostSample, McOptions, McResult, SampleStats, SolveStatus};
pub use worst_case::{pattern_scenario, project_budget, worst_case, WorstCaseConfig, WorstCaseResult};

/// Whole-scenario redraws allowed before sampling gives up.
pub const MAX_REDRAWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioLabel {
    Sampled,
    WorstCase,
    Manual,
}

/// Additive demand variation `[bus][t]` (MW / MVar).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadScenario {
    pub bus_ids: Vec<usize>,
    pub var_p: Vec<Vec<f64>>,
    pub var_q: Vec<Vec<f64>>,
    /// RNG seed that produced the scenario; 0 for constructed ones.
    pub seed: u64,
    pub label: ScenarioLabel,
}

impl LoadScenario {
    pub fn zero(model: &NetworkModel, label: ScenarioLabel) -> Self {
        let horizon = model.horizon();
        let n = model.buses.len();
        Self {
            bus_ids: model.buses.iter().map(|b| b.id).collect(),
            var_p: vec![vec![0.0; horizon]; n],
            var_q: vec![vec![0.0; horizon]; n],
            seed: 0,
            label,
        }
    }

    /// Nominal demand plus this variation, clamped so that no load changes sign.
    pub fn demand(&self, model: &NetworkModel) -> Demand {
        let clamp = |nominal: f64, v: f64| {
            if nominal >= 0.0 {
                (nominal + v).max(0.0)
            } else {
                (nominal + v).min(0.0)
            }
        };
        let mut d = Demand::nominal(model);
        for i in 0..d.p.len() {
            for t in 0..d.p[i].len() {
                d.p[i][t] = clamp(d.p[i][t], self.var_p[i][t]);
                d.q[i][t] = clamp(d.q[i][t], self.var_q[i][t]);
            }
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.var_p.iter().chain(&self.var_q).flatten().all(|v| *v == 0.0)
    }
}

/// Lists every violated bound of the (δ, Δ) polytope.
pub fn check_polytope(model: &NetworkModel, s: &LoadScenario, tol: f64) -> Vec<String> {
    let pol = &model.policy;
    let mut bad = Vec::new();
    for t in 0..model.horizon() {
        let (mut sum_p, mut sum_q, mut dem_p, mut dem_q) = (0.0, 0.0, 0.0, 0.0);
        for (i, bus) in model.buses.iter().enumerate() {
            let (dp, dq) = (bus.load_p[t], bus.load_q[t]);
            let (vp, vq) = (s.var_p[i][t], s.var_q[i][t]);
            if vp.abs() > pol.delta_bus * dp.abs() + tol {
                bad.push(format!("bus {} hour {t}: |P var| {} exceeds δ·P", bus.id, vp));
            }
            if vq.abs() > pol.delta_bus * dq.abs() + tol {
                bad.push(format!("bus {} hour {t}: |Q var| {} exceeds δ·Q", bus.id, vq));
            }
            sum_p += vp;
            sum_q += vq;
            dem_p += dp;
            dem_q += dq;
        }
        if sum_p.abs() > pol.delta_system * dem_p.abs() + tol {
            bad.push(format!("hour {t}: system P variation {sum_p} exceeds Δ·ΣP"));
        }
        if sum_q.abs() > pol.delta_system * dem_q.abs() + tol {
            bad.push(format!("hour {t}: system Q variation {sum_q} exceeds Δ·ΣQ"));
        }
    }
    bad
}

/// Seed of scenario `index` under `master_seed`.
pub fn scenario_seed(master_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng.random()
}

fn within_budget(model: &NetworkModel, s: &LoadScenario) -> bool {
    let pol = &model.policy;
    (0..model.horizon()).all(|t| {
        let mut acc = [0.0f64; 4];
        for (i, bus) in model.buses.iter().enumerate() {
            acc[0] += s.var_p[i][t];
            acc[1] += s.var_q[i][t];
            acc[2] += bus.load_p[t];
            acc[3] += bus.load_q[t];
        }
        acc[0].abs() <= pol.delta_system * acc[2].abs() && acc[1].abs() <= pol.delta_system * acc[3].abs()
    })
}

/// Draws one scenario and reports how many whole-scenario redraws it took.
pub fn sample_scenario_counted<R: Rng>(model: &NetworkModel, rng: &mut R) -> Result<(LoadScenario, usize)> {
    let delta = model.policy.delta_bus;
    let mut s = LoadScenario::zero(model, ScenarioLabel::Sampled);
    if delta == 0.0 {
        return Ok((s, 0));
    }
    let normal = Normal::new(0.0, delta / 3.0).map_err(|e| Error::Validation(e.to_string()))?;
    for redraws in 0..MAX_REDRAWS {
        for (i, bus) in model.buses.iter().enumerate() {
            for t in 0..model.horizon() {
                let x: f64 = normal.sample(rng).clamp(-delta, delta);
                s.var_p[i][t] = bus.load_p[t] * x;
                s.var_q[i][t] = bus.load_q[t] * x;
            }
        }
        if within_budget(model, &s) {
            return Ok((s, redraws));
        }
    }
    Err(Error::RejectionLimit(MAX_REDRAWS))
}

/// Draws one scenario: a truncated Normal(0, (δ/3)²) multiplier per (bus,
/// hour) shared by P and Q, redrawn as a whole until the hourly system
/// budgets hold.
pub fn sample_scenario<R: Rng>(model: &NetworkModel, rng: &mut R) -> Result<LoadScenario> {
    sample_scenario_counted(model, rng).map(|(s, _)| s)
}

/// The scenario with index `index` of a run seeded by `master_seed`.
pub fn sample_indexed(model: &NetworkModel, master_seed: u64, index: u64) -> Result<(LoadScenario, usize)> {
    let seed = scenario_seed(master_seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, redraws) = sample_scenario_counted(model, &mut rng)?;
    s.seed = seed;
    Ok((s, redraws))
}
