//! Independent oracles shared by the integration tests. Nothing here calls the
//! solver; the grid search and the vertex projection are written from the
//! model equations directly.

#![allow(dead_code)]

use std::path::PathBuf;

use gridsure::network::{load_network, NetworkModel};
use gridsure::opf::{build_opf, solve, Demand};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn load(name: &str) -> NetworkModel {
    load_network(fixture(name)).expect("fixture loads")
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Values `0, step, 2 step, ...` up to `hi`, with `hi` itself appended.
fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut k = (lo / step).ceil() as i64;
    loop {
        let x = k as f64 * step;
        if x > hi + 1e-12 {
            break;
        }
        if x >= lo - 1e-12 {
            v.push(x.clamp(lo, hi));
        }
        k += 1;
    }
    if v.first().is_none_or(|&f| f > lo + 1e-12) {
        v.insert(0, lo);
    }
    if v.last().is_none_or(|&l| l < hi - 1e-12) {
        v.push(hi);
    }
    v
}

struct Tree {
    parent: Vec<Option<usize>>,
    r: Vec<f64>,
    x: Vec<f64>,
    /// Parents before children.
    order: Vec<usize>,
}

fn tree(model: &NetworkModel) -> Tree {
    let n = model.buses.len();
    let root = model.buses.iter().position(|b| b.is_root).unwrap();
    let mut parent = vec![None; n];
    let (mut r, mut x) = (vec![0.0; n], vec![0.0; n]);
    let mut order = vec![root];
    let mut k = 0;
    while k < order.len() {
        let u = order[k];
        let uid = model.buses[u].id;
        for l in &model.lines {
            let other = if l.from == uid {
                l.to
            } else if l.to == uid {
                l.from
            } else {
                continue;
            };
            let j = model.buses.iter().position(|b| b.id == other).unwrap();
            if j != root && parent[j].is_none() {
                parent[j] = Some(u);
                r[j] = l.r / model.base.mva;
                x[j] = l.x / model.base.mva;
                order.push(j);
            }
        }
        k += 1;
    }
    Tree { parent, r, x, order }
}

/// LinDistFlow squared voltages for net loads `p`, `q` per bus.
fn voltages(tree: &Tree, v_root: f64, p: &[f64], q: &[f64]) -> Vec<f64> {
    let n = p.len();
    let (mut fp, mut fq) = (p.to_vec(), q.to_vec());
    for &j in tree.order.iter().rev() {
        if let Some(u) = tree.parent[j] {
            fp[u] += fp[j];
            fq[u] += fq[j];
        }
    }
    let mut v = vec![v_root; n];
    for &j in &tree.order {
        if let Some(u) = tree.parent[j] {
            v[j] = v[u] - 2.0 * (tree.r[j] * fp[j] + tree.x[j] * fq[j]);
        }
    }
    v
}

/// Exhaustive grid search over active curtailment and battery power at
/// resolution `step` MW, for models with one market node at the root, unit
/// market loss factor and at most one battery. Each hour is searched for
/// every battery setting; hours are then coupled through the state of charge.
///
/// Reactive relief (curtailment and PV reactive power) is free and raises
/// every voltage monotonically, so a setting is feasible for v_min exactly
/// when it is feasible with full relief. Only if full relief pushes a bus
/// above v_max is the relief grid searched as well.
pub fn brute_force_cost(model: &NetworkModel, step: f64) -> f64 {
    let pol = &model.policy;
    assert_eq!(pol.market_loss_factor, 1.0, "oracle assumes a lossless market");
    assert!(model.buses.iter().filter(|b| b.is_market_node).all(|b| b.is_root));
    let bess: Vec<usize> = (0..model.buses.len()).filter(|&i| model.buses[i].bess.is_some()).collect();
    assert!(bess.len() <= 1, "oracle handles at most one battery");
    let tr = tree(model);
    let n = model.buses.len();
    let horizon = model.horizon();
    let dt = pol.time_step;
    let (v_lo, v_hi) = (pol.v_min * pol.v_min, pol.v_max * pol.v_max);
    let gamma = pol.curtail_fraction_max;

    let battery_levels: Vec<f64> = match bess.first() {
        Some(&i) => {
            let rate = model.buses[i].bess.unwrap().rate_limit;
            let mut g: Vec<f64> = grid(0.0, rate, step).iter().skip(1).map(|x| -x).collect();
            g.reverse();
            g.extend(grid(0.0, rate, step));
            g
        }
        None => vec![0.0],
    };

    // best[t][k]: cheapest feasible hour t with battery setting k
    let mut best = vec![vec![f64::INFINITY; battery_levels.len()]; horizon];
    for t in 0..horizon {
        // (curtailment, its cost) per bus
        let options: Vec<Vec<(f64, f64)>> = model
            .buses
            .iter()
            .map(|b| {
                let dp = b.load_p[t];
                let cps = if gamma > 0.0 && dp > 0.0 { grid(0.0, gamma * dp, step) } else { vec![0.0] };
                cps.into_iter()
                    .map(|cp| (cp, pol.curtail_penalty * (dp.sqrt() - (dp - cp).max(0.0).sqrt())))
                    .collect()
            })
            .collect();
        let relief: Vec<f64> = model
            .buses
            .iter()
            .map(|b| {
                let dq = b.load_q[t];
                let cq = if gamma > 0.0 && dq != 0.0 { gamma * dq.abs() } else { 0.0 };
                let h = b.pv.as_ref().map_or(0.0, |pv| {
                    (pv.capacity[t].powi(2) - pv.generation[t].powi(2)).max(0.0).sqrt()
                });
                cq + h
            })
            .collect();
        let base_p: Vec<f64> = model
            .buses
            .iter()
            .map(|b| b.load_p[t] - b.pv.as_ref().map_or(0.0, |pv| pv.generation[t]))
            .collect();
        let base_q: Vec<f64> = model.buses.iter().map(|b| b.load_q[t]).collect();
        let relief_grids: Vec<Vec<f64>> =
            relief.iter().map(|&r| if r > 0.0 { grid(-r, r, step) } else { vec![0.0] }).collect();

        let feasible = |p: &[f64]| -> bool {
            let q: Vec<f64> = (0..n).map(|i| base_q[i] - relief[i]).collect();
            let v = voltages(&tr, pol.v_root, p, &q);
            if v.iter().any(|&x| x < v_lo - 1e-9) {
                return false;
            }
            if v.iter().all(|&x| x <= v_hi + 1e-9) {
                return true;
            }
            let mut idx = vec![0usize; n];
            loop {
                let q: Vec<f64> = (0..n).map(|i| base_q[i] - relief_grids[i][idx[i]]).collect();
                let v = voltages(&tr, pol.v_root, p, &q);
                if v.iter().all(|&x| x >= v_lo - 1e-9 && x <= v_hi + 1e-9) {
                    return true;
                }
                if !odometer(&mut idx, |d| relief_grids[d].len()) {
                    return false;
                }
            }
        };

        for (k, &bat) in battery_levels.iter().enumerate() {
            let mut idx = vec![0usize; n];
            let mut p = vec![0.0; n];
            loop {
                let mut curtail = 0.0;
                for i in 0..n {
                    let (cp, cost) = options[i][idx[i]];
                    p[i] = base_p[i] - cp;
                    curtail += cost;
                }
                if let Some(&b) = bess.first() {
                    p[b] += bat;
                }
                let net: f64 = p.iter().sum();
                let energy = if net >= 0.0 {
                    pol.buy_price[t] * net * dt
                } else {
                    pol.sell_price[t] * net * dt
                };
                let cost = energy + curtail;
                if cost < best[t][k] && feasible(&p) {
                    best[t][k] = cost;
                }
                if !odometer(&mut idx, |d| options[d].len()) {
                    break;
                }
            }
        }
    }

    // couple hours through the battery state of charge
    let mut total = f64::INFINITY;
    let mut seq = vec![0usize; horizon];
    loop {
        let feasible = match bess.first() {
            Some(&i) => {
                let b = model.buses[i].bess.unwrap();
                let mut soc = b.initial_energy;
                let mut ok = true;
                for &k in &seq {
                    let x = battery_levels[k];
                    soc += if x >= 0.0 { b.efficiency * x * dt } else { x * dt / b.efficiency };
                    ok &= soc >= -1e-12 && soc <= b.capacity + 1e-12;
                }
                ok && (!pol.terminal_soc || soc >= b.initial_energy - 1e-12)
            }
            None => true,
        };
        if feasible {
            let c: f64 = seq.iter().enumerate().map(|(t, &k)| best[t][k]).sum();
            total = total.min(c);
        }
        if !odometer(&mut seq, |_| battery_levels.len()) {
            break;
        }
    }
    total + pol.one_time_incentive * participants(model) as f64
}

/// Advances a mixed-radix counter; false once it wraps around.
fn odometer(idx: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for d in 0..idx.len() {
        idx[d] += 1;
        if idx[d] < radix(d) {
            return true;
        }
        idx[d] = 0;
    }
    false
}

fn participants(model: &NetworkModel) -> usize {
    if model.policy.curtail_fraction_max <= 0.0 {
        return 0;
    }
    model.buses.iter().filter(|b| b.load_p.iter().any(|&p| p > 0.0)).count()
}

/// Demand at a sign-pattern vertex `[bus][t]` after scaling same-sign
/// entries of any hour whose system sum exceeds the budget.
pub fn vertex_demand(model: &NetworkModel, pattern: &[Vec<i8>]) -> Demand {
    let pol = &model.policy;
    let n = model.buses.len();
    let mut d = Demand::nominal(model);
    for t in 0..model.horizon() {
        for reactive in [false, true] {
            let nominal: Vec<f64> = model
                .buses
                .iter()
                .map(|b| if reactive { b.load_q[t] } else { b.load_p[t] })
                .collect();
            let mut var: Vec<f64> = (0..n).map(|i| pattern[i][t] as f64 * pol.delta_bus * nominal[i].abs()).collect();
            let sum: f64 = var.iter().sum();
            let budget = pol.delta_system * nominal.iter().sum::<f64>().abs();
            if sum.abs() > budget {
                let same: f64 = var.iter().filter(|v| v.signum() == sum.signum()).sum();
                let other = sum - same;
                let factor = (sum.signum() * budget - other) / same;
                for v in var.iter_mut().filter(|v| v.signum() == sum.signum()) {
                    *v *= factor;
                }
            }
            for i in 0..n {
                let x = (nominal[i] + var[i]).max(0.0);
                if reactive {
                    d.q[i][t] = x;
                } else {
                    d.p[i][t] = x;
                }
            }
        }
    }
    d
}

/// Largest optimal cost over every sign-pattern vertex of the variation
/// polytope; infeasible vertices are skipped. Returns the cost and the
/// number of vertices solved.
pub fn enumerate_vertices(model: &NetworkModel) -> (f64, usize) {
    let n = model.buses.len();
    let horizon = model.horizon();
    let coords: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..horizon).map(move |t| (i, t)))
        .filter(|&(i, t)| model.buses[i].load_p[t] != 0.0 || model.buses[i].load_q[t] != 0.0)
        .collect();
    let mut best = f64::NEG_INFINITY;
    let mut solved = 0;
    let total = 3usize.pow(coords.len() as u32);
    for code in 0..total {
        let mut pattern = vec![vec![0i8; horizon]; n];
        let mut c = code;
        for &(i, t) in &coords {
            pattern[i][t] = (c % 3) as i8 - 1;
            c /= 3;
        }
        let demand = vertex_demand(model, &pattern);
        let problem = build_opf(model, Some(&demand)).unwrap();
        if let Ok(sol) = solve(&problem) {
            solved += 1;
            best = best.max(sol.cost_total);
        }
    }
    (best, solved)
}
