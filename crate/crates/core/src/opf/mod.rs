//! Day-ahead cost minimisation on a radial LinDistFlow network.
//!
//! [`build_opf`] turns a [`NetworkModel`] (optionally with overridden demand)
//! into an [`LpProblem`]; [`solve`] runs branch-and-bound over the battery
//! mode binaries and maps the optimum back to a [`DispatchSolution`].
//!
//! Two flow formulations are available. `Explicit` keeps line flows and
//! squared voltages as variables with one balance row per line. `Substituted`
//! eliminates them: every flow is a sum of downstream net injections, so each
//! hour needs a single root balance row, and each voltage bound becomes a row
//! over the injections weighted by shared-path impedances. Voltage rows are
//! lazy and enter the simplex only when violated.

mod check;
mod cost;
mod incentive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, Sense, SolveOptions, VarId, WarmStart};
use crate::network::{LossConvention, NetworkModel, Topology};

pub use check::check_dispatch;
pub use cost::{curtailment_cost, curtailment_segments, segment_error_bound};
pub use incentive::{compute_one_time_incentive, minimal_curtailment_fraction, Incentive};

/// Per-bus, per-hour demand `[bus][t]` in MW / MVar.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Demand {
    pub p: Vec<Vec<f64>>,
    pub q: Vec<Vec<f64>>,
}

impl Demand {
    pub fn nominal(model: &NetworkModel) -> Self {
        Self {
            p: model.buses.iter().map(|b| b.load_p.clone()).collect(),
            q: model.buses.iter().map(|b| b.load_q.clone()).collect(),
        }
    }

    pub fn total_p(&self) -> f64 {
        self.p.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Formulation {
    Explicit,
    #[default]
    Substituted,
}

#[derive(Debug, Clone, Copy)]
pub struct OpfOptions {
    /// Breakpoints of the piecewise curtailment cost per (bus, hour).
    pub breakpoints: usize,
    pub formulation: Formulation,
    pub solver: SolveOptions,
}

impl Default for OpfOptions {
    fn default() -> Self {
        Self {
            breakpoints: 16,
            formulation: Formulation::Substituted,
            solver: SolveOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Slot {
    buy: Option<VarId>,
    sell: Option<VarId>,
    charge: Option<VarId>,
    discharge: Option<VarId>,
    mode: Option<VarId>,
    soc: Option<VarId>,
    curtail_p: Option<VarId>,
    curtail_q: Option<VarId>,
    pv_q: Option<VarId>,
}

/// A built OPF instance together with the data needed to interpret its optimum.
#[derive(Debug, Clone)]
pub struct OpfProblem {
    pub lp: LpProblem,
    pub options: OpfOptions,
    pub demand: Demand,
    model: NetworkModel,
    topology: Topology,
    slots: Vec<Vec<Slot>>,
    /// Explicit formulation only: (p, q) per oriented line position and v per bus.
    flows: Vec<Vec<(VarId, VarId)>>,
    volts: Vec<Vec<Option<VarId>>>,
    participants: usize,
}

impl OpfProblem {
    pub fn model(&self) -> &NetworkModel {
        &self.model
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    /// Number of buses charged the one-time incentive.
    pub fn participants(&self) -> usize {
        self.participants
    }
}

/// Optimal schedule. Matrices are indexed `[bus][t]` in model bus order,
/// flows `[line][t]` in model line order.
#[derive(Debug, Clone, Serialize)]
pub struct DispatchSolution {
    pub bus_ids: Vec<usize>,
    pub lines: Vec<(usize, usize)>,
    pub buy: Vec<Vec<f64>>,
    pub sell: Vec<Vec<f64>>,
    pub charge: Vec<Vec<f64>>,
    pub discharge: Vec<Vec<f64>>,
    pub charge_mode: Vec<Vec<u8>>,
    /// Stored energy at the start of each hour plus the final level (T + 1 entries).
    pub soc: Vec<Vec<f64>>,
    pub curtail_p: Vec<Vec<f64>>,
    pub curtail_q: Vec<Vec<f64>>,
    pub pv_q: Vec<Vec<f64>>,
    pub flow_p: Vec<Vec<f64>>,
    pub flow_q: Vec<Vec<f64>>,
    pub v_sq: Vec<Vec<f64>>,
    pub cost_total: f64,
    pub cost_energy: f64,
    pub cost_curtail: f64,
    /// Objective of the piecewise-linear model (an upper bound on `cost_total`).
    pub lp_objective: f64,
    pub nodes: usize,
    pub lp_iterations: usize,
}

impl DispatchSolution {
    /// Flat `bus,t,variable,value` rows; line quantities use the receiving bus.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bus", "t", "variable", "value"])?;
        let per_bus: [(&str, &Vec<Vec<f64>>); 9] = [
            ("buy", &self.buy),
            ("sell", &self.sell),
            ("charge", &self.charge),
            ("discharge", &self.discharge),
            ("soc", &self.soc),
            ("curtail_p", &self.curtail_p),
            ("curtail_q", &self.curtail_q),
            ("pv_q", &self.pv_q),
            ("v_sq", &self.v_sq),
        ];
        for (name, m) in per_bus {
            for (i, row) in m.iter().enumerate() {
                for (t, v) in row.iter().enumerate() {
                    w.write_record([self.bus_ids[i].to_string(), t.to_string(), name.into(), v.to_string()])?;
                }
            }
        }
        for (i, row) in self.charge_mode.iter().enumerate() {
            for (t, v) in row.iter().enumerate() {
                w.write_record([self.bus_ids[i].to_string(), t.to_string(), "charge_mode".into(), v.to_string()])?;
            }
        }
        for (name, m) in [("flow_p", &self.flow_p), ("flow_q", &self.flow_q)] {
            for (l, row) in m.iter().enumerate() {
                for (t, v) in row.iter().enumerate() {
                    w.write_record([self.lines[l].1.to_string(), t.to_string(), name.into(), v.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn total_curtailed_energy(&self, time_step: f64) -> f64 {
        self.curtail_p.iter().flatten().sum::<f64>() * time_step
    }
}

/// Builds the OPF with default options.
pub fn build_opf(model: &NetworkModel, demand_override: Option<&Demand>) -> Result<OpfProblem> {
    build_opf_with(model, demand_override, &OpfOptions::default())
}

pub fn build_opf_with(model: &NetworkModel, demand_override: Option<&Demand>, options: &OpfOptions) -> Result<OpfProblem> {
    let topology = model.validate()?;
    let n = model.buses.len();
    let horizon = model.horizon();
    let demand = match demand_override {
        Some(d) => {
            if d.p.len() != n || d.q.len() != n || d.p.iter().chain(&d.q).any(|r| r.len() != horizon) {
                return Err(Error::Validation("demand override does not match the network shape".into()));
            }
            if let Some((i, t)) = (0..n)
                .flat_map(|i| (0..horizon).map(move |t| (i, t)))
                .find(|&(i, t)| !(d.p[i][t] >= 0.0))
            {
                return Err(Error::Validation(format!(
                    "demand override for bus {} is negative at hour {t}",
                    model.buses[i].id
                )));
            }
            d.clone()
        }
        None => Demand::nominal(model),
    };
    let pol = &model.policy;
    let dt = pol.time_step;
    let eta = pol.market_loss_factor;
    let gamma = pol.curtail_fraction_max;
    let (buy_coef, sell_coef) = match pol.loss_convention {
        LossConvention::Literal => (1.0 / eta, -eta),
        LossConvention::Physical => (eta, -1.0 / eta),
    };

    let mut lp = LpProblem::new();
    let mut slots = vec![vec![Slot::default(); horizon]; n];
    let mut participants = 0;
    let mut q_headroom = vec![vec![0.0; horizon]; n];

    for (i, bus) in model.buses.iter().enumerate() {
        let id = bus.id;
        if let Some(pv) = &bus.pv {
            for t in 0..horizon {
                q_headroom[i][t] = pv.reactive_limit(t)?;
            }
        }
        if gamma > 0.0 && demand.p[i].iter().any(|&p| p > 0.0) {
            participants += 1;
        }
        for t in 0..horizon {
            let s = &mut slots[i][t];
            if bus.is_market_node {
                s.buy = Some(lp.add_var(format!("buy[{id},{t}]"), 0.0, f64::INFINITY, pol.buy_price[t] * dt));
                s.sell = Some(lp.add_var(format!("sell[{id},{t}]"), 0.0, f64::INFINITY, -pol.sell_price[t] * dt));
            }
            if let Some(b) = &bus.bess {
                s.charge = Some(lp.add_var(format!("charge[{id},{t}]"), 0.0, b.rate_limit, 0.0));
                s.discharge = Some(lp.add_var(format!("discharge[{id},{t}]"), 0.0, b.rate_limit, 0.0));
                s.mode = Some(lp.add_binary(format!("mode[{id},{t}]"), 0.0));
                let floor = if pol.terminal_soc && t + 1 == horizon { b.initial_energy } else { 0.0 };
                s.soc = Some(lp.add_var(format!("soc[{id},{}]", t + 1), floor, b.capacity, 0.0));
            }
            let dp = demand.p[i][t];
            if gamma > 0.0 && dp > 0.0 {
                let v = lp.add_var(format!("curtail_p[{id},{t}]"), 0.0, gamma * dp, 0.0);
                if pol.curtail_penalty > 0.0 {
                    let (bps, slopes) = curtailment_segments(pol.curtail_penalty, dp, gamma, options.breakpoints);
                    lp.add_piecewise(v, bps, slopes, 0.0);
                }
                s.curtail_p = Some(v);
            }
            let dq = demand.q[i][t];
            if gamma > 0.0 && dq != 0.0 {
                let lim = gamma * dq.abs();
                s.curtail_q = Some(lp.add_var(format!("curtail_q[{id},{t}]"), -lim, lim, 0.0));
            }
            if q_headroom[i][t] > 0.0 {
                let h = q_headroom[i][t];
                s.pv_q = Some(lp.add_var(format!("pv_q[{id},{t}]"), -h, h, 0.0));
            }
        }
    }
    lp.objective_offset = pol.one_time_incentive * participants as f64;

    // active and reactive injection terms per (bus, t)
    let inj_p = |s: &Slot| -> Vec<(VarId, f64)> {
        let mut v = Vec::new();
        v.extend(s.buy.map(|x| (x, buy_coef)));
        v.extend(s.sell.map(|x| (x, sell_coef)));
        v.extend(s.discharge.map(|x| (x, 1.0)));
        v.extend(s.charge.map(|x| (x, -1.0)));
        v.extend(s.curtail_p.map(|x| (x, 1.0)));
        v
    };
    let inj_q = |s: &Slot| -> Vec<(VarId, f64)> {
        let mut v = Vec::new();
        v.extend(s.curtail_q.map(|x| (x, 1.0)));
        v.extend(s.pv_q.map(|x| (x, 1.0)));
        v
    };
    let pv_p = |i: usize, t: usize| model.buses[i].pv.as_ref().map_or(0.0, |pv| pv.generation[t]);

    // battery dynamics and mode exclusivity
    for (i, bus) in model.buses.iter().enumerate() {
        let Some(b) = &bus.bess else { continue };
        let id = bus.id;
        for t in 0..horizon {
            let s = slots[i][t];
            let (ch, dis, z, soc) = (s.charge.unwrap(), s.discharge.unwrap(), s.mode.unwrap(), s.soc.unwrap());
            let mut terms = vec![(soc, 1.0), (dis, dt / b.efficiency), (ch, -b.efficiency * dt)];
            let rhs = if t == 0 {
                b.initial_energy
            } else {
                terms.push((slots[i][t - 1].soc.unwrap(), -1.0));
                0.0
            };
            lp.add_constraint(format!("soc_balance[{id},{t}]"), terms, Sense::Eq, rhs);
            lp.add_constraint(format!("charge_mode[{id},{t}]"), vec![(ch, 1.0), (z, -b.rate_limit)], Sense::Le, 0.0);
            lp.add_constraint(
                format!("discharge_mode[{id},{t}]"),
                vec![(dis, 1.0), (z, b.rate_limit)],
                Sense::Le,
                b.rate_limit,
            );
        }
    }

    let s_base = model.base.mva;
    let v_lo = pol.v_min * pol.v_min;
    let v_hi = pol.v_max * pol.v_max;
    let root = topology.root;
    let mut flows = Vec::new();
    let mut volts: Vec<Vec<Option<VarId>>> = Vec::new();

    match options.formulation {
        Formulation::Substituted => {
            for t in 0..horizon {
                let mut terms = Vec::new();
                let mut rhs = 0.0;
                for i in 0..n {
                    terms.extend(inj_p(&slots[i][t]));
                    rhs += demand.p[i][t] - pv_p(i, t);
                }
                lp.add_constraint(format!("balance[{t}]"), terms, Sense::Eq, rhs);
            }
            for j in 0..n {
                if j == root {
                    continue;
                }
                let id = model.buses[j].id;
                for t in 0..horizon {
                    let mut terms = Vec::new();
                    let mut drop = 0.0;
                    for k in 0..n {
                        let (r, x) = topology.shared_impedance(j, k);
                        if r == 0.0 && x == 0.0 {
                            continue;
                        }
                        let (r, x) = (2.0 * r / s_base, 2.0 * x / s_base);
                        drop += r * (demand.p[k][t] - pv_p(k, t)) + x * demand.q[k][t];
                        if r != 0.0 {
                            terms.extend(inj_p(&slots[k][t]).into_iter().map(|(v, a)| (v, a * r)));
                        }
                        if x != 0.0 {
                            terms.extend(inj_q(&slots[k][t]).into_iter().map(|(v, a)| (v, a * x)));
                        }
                    }
                    let base = pol.v_root - drop;
                    lp.add_lazy_constraint(format!("v_min[{id},{t}]"), terms.clone(), Sense::Ge, v_lo - base);
                    lp.add_lazy_constraint(format!("v_max[{id},{t}]"), terms, Sense::Le, v_hi - base);
                }
            }
        }
        Formulation::Explicit => {
            flows = topology
                .order
                .iter()
                .map(|ol| {
                    let cid = model.buses[ol.child].id;
                    (0..horizon)
                        .map(|t| {
                            (
                                lp.add_var(format!("p[{cid},{t}]"), f64::NEG_INFINITY, f64::INFINITY, 0.0),
                                lp.add_var(format!("q[{cid},{t}]"), f64::NEG_INFINITY, f64::INFINITY, 0.0),
                            )
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
            volts = (0..n)
                .map(|j| {
                    (0..horizon)
                        .map(|t| (j != root).then(|| lp.add_var(format!("v[{},{t}]", model.buses[j].id), v_lo, v_hi, 0.0)))
                        .collect()
                })
                .collect();
            for t in 0..horizon {
                for j in 0..n {
                    let id = model.buses[j].id;
                    // p_in - sum p_out + injection = demand - pv  (root has no p_in)
                    let mut tp: Vec<(VarId, f64)> = inj_p(&slots[j][t]);
                    let mut tq: Vec<(VarId, f64)> = inj_q(&slots[j][t]);
                    if let Some(k) = topology.feeder[j] {
                        tp.push((flows[k][t].0, 1.0));
                        tq.push((flows[k][t].1, 1.0));
                    }
                    for &k in &topology.downstream[j] {
                        tp.push((flows[k][t].0, -1.0));
                        tq.push((flows[k][t].1, -1.0));
                    }
                    lp.add_constraint(format!("p_balance[{id},{t}]"), tp, Sense::Eq, demand.p[j][t] - pv_p(j, t));
                    if j != root {
                        lp.add_constraint(format!("q_balance[{id},{t}]"), tq, Sense::Eq, demand.q[j][t]);
                    }
                }
                for (k, ol) in topology.order.iter().enumerate() {
                    let id = model.buses[ol.child].id;
                    let mut terms = vec![
                        (volts[ol.child][t].unwrap(), 1.0),
                        (flows[k][t].0, 2.0 * ol.r / s_base),
                        (flows[k][t].1, 2.0 * ol.x / s_base),
                    ];
                    let rhs = match volts[ol.parent][t] {
                        Some(vp) => {
                            terms.push((vp, -1.0));
                            0.0
                        }
                        None => pol.v_root,
                    };
                    lp.add_constraint(format!("voltage[{id},{t}]"), terms, Sense::Eq, rhs);
                }
            }
        }
    }

    Ok(OpfProblem {
        lp,
        options: *options,
        demand,
        model: model.clone(),
        topology,
        slots,
        flows,
        volts,
        participants,
    })
}

/// Solves with the problem's own solver options.
pub fn solve(problem: &OpfProblem) -> Result<DispatchSolution> {
    solve_warm(problem, None).map(|(s, _)| s)
}

/// Solves starting from a previous basis; returns the final basis for reuse.
pub fn solve_warm(problem: &OpfProblem, warm: Option<&WarmStart>) -> Result<(DispatchSolution, Option<WarmStart>)> {
    let sol = lp::solve_with(&lp::DenseSimplex, &problem.lp, &problem.options.solver, warm)?;
    let dispatch = extract(problem, &sol.values, sol.objective, sol.stats);
    Ok((dispatch, sol.warm_start))
}

fn extract(problem: &OpfProblem, x: &[f64], objective: f64, stats: lp::BranchStats) -> DispatchSolution {
    let model = &problem.model;
    let topo = &problem.topology;
    let pol = &model.policy;
    let n = model.buses.len();
    let horizon = model.horizon();
    let get = |v: Option<VarId>| v.map_or(0.0, |v| x[v]);
    let grid = |f: &dyn Fn(&Slot) -> Option<VarId>| -> Vec<Vec<f64>> {
        problem.slots.iter().map(|row| row.iter().map(|s| get(f(s))).collect()).collect()
    };
    let buy = grid(&|s| s.buy);
    let sell = grid(&|s| s.sell);
    let charge = grid(&|s| s.charge);
    let discharge = grid(&|s| s.discharge);
    let curtail_p = grid(&|s| s.curtail_p);
    let curtail_q = grid(&|s| s.curtail_q);
    let pv_q = grid(&|s| s.pv_q);
    let charge_mode = problem
        .slots
        .iter()
        .map(|row| row.iter().map(|s| s.mode.map_or(0, |v| x[v].round() as u8)).collect())
        .collect();
    let soc = model
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| match &b.bess {
            Some(bess) => std::iter::once(bess.initial_energy)
                .chain(problem.slots[i].iter().map(|s| get(s.soc)))
                .collect(),
            None => vec![0.0; horizon + 1],
        })
        .collect();

    let (buy_coef, sell_coef) = match pol.loss_convention {
        LossConvention::Literal => (1.0 / pol.market_loss_factor, -pol.market_loss_factor),
        LossConvention::Physical => (pol.market_loss_factor, -1.0 / pol.market_loss_factor),
    };
    let mut flow_p = vec![vec![0.0; horizon]; model.lines.len()];
    let mut flow_q = vec![vec![0.0; horizon]; model.lines.len()];
    let mut v_sq = vec![vec![pol.v_root; horizon]; n];
    for t in 0..horizon {
        let mut net_p = vec![0.0; n];
        let mut net_q = vec![0.0; n];
        for i in 0..n {
            let pv = model.buses[i].pv.as_ref().map_or(0.0, |p| p.generation[t]);
            net_p[i] = problem.demand.p[i][t] - curtail_p[i][t] - pv
                - (buy_coef * buy[i][t] + sell_coef * sell[i][t])
                - (discharge[i][t] - charge[i][t]);
            net_q[i] = problem.demand.q[i][t] - curtail_q[i][t] - pv_q[i][t];
        }
        // leaf-to-root accumulation, then root-to-leaf voltage sweep
        let mut acc_p = net_p.clone();
        let mut acc_q = net_q.clone();
        for ol in topo.order.iter().rev() {
            acc_p[ol.parent] += acc_p[ol.child];
            acc_q[ol.parent] += acc_q[ol.child];
        }
        for (k, ol) in topo.order.iter().enumerate() {
            let (p, q) = match problem.flows.get(k) {
                Some(f) => (x[f[t].0], x[f[t].1]),
                None => (acc_p[ol.child], acc_q[ol.child]),
            };
            flow_p[ol.line][t] = p;
            flow_q[ol.line][t] = q;
            v_sq[ol.child][t] = match problem.volts.get(ol.child).and_then(|v| v[t]) {
                Some(v) => x[v],
                None => v_sq[ol.parent][t] - 2.0 * (ol.r * p + ol.x * q) / model.base.mva,
            };
        }
    }

    let cost_energy: f64 = (0..n)
        .flat_map(|i| (0..horizon).map(move |t| (i, t)))
        .map(|(i, t)| (pol.buy_price[t] * buy[i][t] - pol.sell_price[t] * sell[i][t]) * pol.time_step)
        .sum();
    let cost_curtail: f64 = (0..n)
        .flat_map(|i| (0..horizon).map(move |t| (i, t)))
        .map(|(i, t)| cost::sqrt_term(pol.curtail_penalty, problem.demand.p[i][t], curtail_p[i][t]))
        .sum::<f64>()
        + pol.one_time_incentive * problem.participants as f64;

    DispatchSolution {
        bus_ids: model.buses.iter().map(|b| b.id).collect(),
        lines: model.lines.iter().map(|l| (l.from, l.to)).collect(),
        buy,
        sell,
        charge,
        discharge,
        charge_mode,
        soc,
        curtail_p,
        curtail_q,
        pv_q,
        flow_p,
        flow_q,
        v_sq,
        cost_total: cost_energy + cost_curtail,
        cost_energy,
        cost_curtail,
        lp_objective: objective,
        nodes: stats.nodes,
        lp_iterations: stats.lp_iterations,
    }
}
