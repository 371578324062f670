use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{LoadScenario, ScenarioLabel};
use crate::error::{Error, Result};
use crate::lp::WarmStart;
use crate::network::NetworkModel;
use crate::opf::{build_opf_with, solve_warm, OpfOptions};

#[derive(Debug, Clone, Copy)]
pub struct WorstCaseConfig {
    /// Number of greedy runs; run 0 starts from the all-increase vertex, the
    /// others from random sign patterns.
    pub restarts: usize,
    pub seed: u64,
    /// Full sweeps over the coordinates per run.
    pub max_passes: usize,
    pub opf: OpfOptions,
    /// Worker threads for running restarts side by side; 0 uses the global pool.
    pub jobs: usize,
}

impl Default for WorstCaseConfig {
    fn default() -> Self {
        Self {
            restarts: 4,
            seed: 0,
            max_passes: 10,
            opf: OpfOptions::default(),
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorstCaseResult {
    pub scenario: LoadScenario,
    /// Sign pattern of the returned vertex, `[bus][t]` in {-1, 0, 1}.
    pub pattern: Vec<Vec<i8>>,
    /// Worst-case cost with the battery mode binaries enforced.
    pub cost: f64,
    /// The same vertex with binaries relaxed, as seen by the search.
    pub relaxed_cost: f64,
    pub nominal_cost: f64,
    /// Best relaxed cost reached by each restart.
    pub restart_costs: Vec<f64>,
    /// False when restarts disagree by more than 0.1%.
    pub certified: bool,
    pub evaluations: usize,
}

/// Rescales same-sign variations at each hour whose system sum leaves the
/// Δ budget, separately for P and Q, so that the sum lands on the budget.
pub fn project_budget(model: &NetworkModel, s: &mut LoadScenario) {
    let delta = model.policy.delta_system;
    for t in 0..model.horizon() {
        for (var, nominal) in [(&mut s.var_p, true), (&mut s.var_q, false)] {
            let total: f64 = model
                .buses
                .iter()
                .map(|b| if nominal { b.load_p[t] } else { b.load_q[t] })
                .sum();
            let budget = delta * total.abs();
            let (mut pos, mut neg) = (0.0, 0.0);
            for row in var.iter() {
                if row[t] > 0.0 {
                    pos += row[t];
                } else {
                    neg += row[t];
                }
            }
            let sum = pos + neg;
            let factor = if sum > budget && pos > 0.0 {
                Some(((budget - neg) / pos, true))
            } else if sum < -budget && neg < 0.0 {
                Some(((-budget - pos) / neg, false))
            } else {
                None
            };
            if let Some((f, positive)) = factor {
                for row in var.iter_mut() {
                    if (positive && row[t] > 0.0) || (!positive && row[t] < 0.0) {
                        row[t] *= f;
                    }
                }
            }
        }
    }
}

/// Vertex `s · δ · D` of the per-bus box, projected onto the budget.
pub fn pattern_scenario(model: &NetworkModel, pattern: &[Vec<i8>]) -> LoadScenario {
    let delta = model.policy.delta_bus;
    let mut s = LoadScenario::zero(model, ScenarioLabel::WorstCase);
    for (i, bus) in model.buses.iter().enumerate() {
        for t in 0..model.horizon() {
            let sign = pattern[i][t] as f64;
            s.var_p[i][t] = sign * delta * bus.load_p[t];
            s.var_q[i][t] = sign * delta * bus.load_q[t];
        }
    }
    project_budget(model, &mut s);
    s
}

struct Evaluator<'a> {
    model: &'a NetworkModel,
    opf: OpfOptions,
    warm: Option<WarmStart>,
    count: usize,
}

impl Evaluator<'_> {
    /// Relaxed LL cost at a vertex; `None` when the LL is infeasible there.
    fn cost(&mut self, pattern: &[Vec<i8>]) -> Result<Option<f64>> {
        self.count += 1;
        let demand = pattern_scenario(self.model, pattern).demand(self.model);
        let problem = build_opf_with(self.model, Some(&demand), &self.opf)?;
        match solve_warm(&problem, self.warm.as_ref()) {
            Ok((d, warm)) => {
                self.warm = warm;
                Ok(Some(d.cost_total))
            }
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

fn greedy(
    model: &NetworkModel,
    cfg: &WorstCaseConfig,
    coords: &[(usize, usize)],
    start: Vec<Vec<i8>>,
    warm: Option<WarmStart>,
) -> Result<(Vec<Vec<i8>>, f64, usize)> {
    let mut opf = cfg.opf;
    opf.solver.relax_integrality = true;
    let mut ev = Evaluator { model, opf, warm, count: 0 };
    let mut cur = start;
    let mut cur_cost = ev.cost(&cur)?.unwrap_or(f64::NEG_INFINITY);
    for _ in 0..cfg.max_passes {
        let mut improved = false;
        for &(i, t) in coords {
            let keep = cur[i][t];
            for v in [1i8, -1, 0] {
                if v == keep {
                    continue;
                }
                cur[i][t] = v;
                match ev.cost(&cur)? {
                    Some(c) if c > cur_cost + 1e-9 * cur_cost.abs().max(1.0) => {
                        cur_cost = c;
                        improved = true;
                        break;
                    }
                    _ => cur[i][t] = keep,
                }
                if cur[i][t] == v {
                    break;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok((cur, cur_cost, ev.count))
}

/// Searches the vertices of the (δ, Δ) polytope for the variation that
/// maximises the optimal operating cost.
pub fn worst_case(model: &NetworkModel, cfg: &WorstCaseConfig) -> Result<WorstCaseResult> {
    let n = model.buses.len();
    let horizon = model.horizon();
    let nominal_problem = build_opf_with(model, None, &cfg.opf)?;
    let (nominal, warm) = solve_warm(&nominal_problem, None)?;
    let zero = vec![vec![0i8; horizon]; n];
    if model.policy.delta_bus == 0.0 {
        return Ok(WorstCaseResult {
            scenario: LoadScenario::zero(model, ScenarioLabel::WorstCase),
            pattern: zero,
            cost: nominal.cost_total,
            relaxed_cost: nominal.cost_total,
            nominal_cost: nominal.cost_total,
            restart_costs: vec![nominal.cost_total],
            certified: true,
            evaluations: 0,
        });
    }

    let coords: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..horizon).map(move |t| (i, t)))
        .filter(|&(i, t)| model.buses[i].load_p[t] != 0.0 || model.buses[i].load_q[t] != 0.0)
        .collect();
    let starts: Vec<Vec<Vec<i8>>> = (0..cfg.restarts.max(1))
        .map(|r| {
            let mut p = zero.clone();
            if r == 0 {
                for &(i, t) in &coords {
                    p[i][t] = 1;
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(r as u64);
                for &(i, t) in &coords {
                    p[i][t] = rng.random_range(-1i8..=1);
                }
            }
            p
        })
        .collect();

    let run = |start: Vec<Vec<i8>>| greedy(model, cfg, &coords, start, warm.clone());
    let runs: Vec<(Vec<Vec<i8>>, f64, usize)> = if cfg.jobs == 0 {
        starts.into_par_iter().map(run).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Validation(format!("cannot start {} workers: {e}", cfg.jobs)))?;
        pool.install(|| starts.into_par_iter().map(run).collect::<Result<_>>())?
    };

    let restart_costs: Vec<f64> = runs.iter().map(|r| r.1).collect();
    let evaluations = runs.iter().map(|r| r.2).sum();
    let (best_idx, _) = restart_costs
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (k, &c)| if c > acc.1 { (k, c) } else { acc });
    let (pattern, relaxed_cost, _) = runs[best_idx].clone();
    if !relaxed_cost.is_finite() {
        return Err(Error::Infeasible("every searched vertex makes the dispatch infeasible".into()));
    }
    let lo = restart_costs.iter().cloned().fold(f64::INFINITY, f64::min);
    let certified = (relaxed_cost - lo) <= 1e-3 * relaxed_cost.abs();

    let scenario = pattern_scenario(model, &pattern);
    let exact = build_opf_with(model, Some(&scenario.demand(model)), &cfg.opf)?;
    let (d, _) = solve_warm(&exact, warm.as_ref())?;
    Ok(WorstCaseResult {
        scenario,
        pattern,
        cost: d.cost_total,
        relaxed_cost,
        nominal_cost: nominal.cost_total,
        restart_costs,
        certified,
        evaluations,
    })
}
