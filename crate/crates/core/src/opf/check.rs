use super::{Demand, DispatchSolution};
use crate::network::{LossConvention, NetworkModel};

/// Re-evaluates every constraint of the cost model on a finished dispatch.
///
/// This works from the raw model data with its own tree walk, so it does not
/// share code with the problem builder. Each violation is described in one
/// string; an empty list certifies the dispatch at tolerance `tol`.
pub fn check_dispatch(model: &NetworkModel, demand: &Demand, d: &DispatchSolution, tol: f64) -> Vec<String> {
    let mut bad = Vec::new();
    let pol = &model.policy;
    let n = model.buses.len();
    let horizon = model.horizon();
    let gamma = pol.curtail_fraction_max;
    let mut flag = |ok: bool, what: String| {
        if !ok {
            bad.push(what);
        }
    };

    for (i, bus) in model.buses.iter().enumerate() {
        let id = bus.id;
        for t in 0..horizon {
            let (buy, sell) = (d.buy[i][t], d.sell[i][t]);
            if bus.is_market_node {
                flag(buy >= -tol && sell >= -tol, format!("market sign at bus {id} hour {t}"));
            } else {
                flag(buy.abs() <= tol && sell.abs() <= tol, format!("market use at non-market bus {id} hour {t}"));
            }
            let (cp, cq, dp, dq) = (d.curtail_p[i][t], d.curtail_q[i][t], demand.p[i][t], demand.q[i][t]);
            flag(cp >= -tol && cp <= gamma * dp + tol, format!("curtail_p {cp} at bus {id} hour {t}"));
            flag(cq.abs() <= gamma * dq.abs() + tol, format!("curtail_q {cq} at bus {id} hour {t}"));
            let q_lim = bus.pv.as_ref().map_or(0.0, |pv| {
                (pv.capacity[t].powi(2) - pv.generation[t].powi(2)).max(0.0).sqrt()
            });
            flag(d.pv_q[i][t].abs() <= q_lim + tol, format!("pv_q {} at bus {id} hour {t}", d.pv_q[i][t]));
            let (ch, dis) = (d.charge[i][t], d.discharge[i][t]);
            match &bus.bess {
                Some(b) => {
                    flag(ch >= -tol && ch <= b.rate_limit + tol, format!("charge {ch} at bus {id} hour {t}"));
                    flag(dis >= -tol && dis <= b.rate_limit + tol, format!("discharge {dis} at bus {id} hour {t}"));
                    flag(ch.min(dis) <= tol, format!("simultaneous charge and discharge at bus {id} hour {t}"));
                    let z = d.charge_mode[i][t];
                    flag(
                        if z == 1 { dis <= tol } else { ch <= tol },
                        format!("mode {z} contradicts battery flows at bus {id} hour {t}"),
                    );
                    let next = d.soc[i][t] - dis / b.efficiency * pol.time_step + b.efficiency * ch * pol.time_step;
                    flag((d.soc[i][t + 1] - next).abs() <= tol, format!("energy balance at bus {id} hour {t}"));
                    flag(
                        d.soc[i][t + 1] >= -tol && d.soc[i][t + 1] <= b.capacity + tol,
                        format!("state of charge {} at bus {id} hour {}", d.soc[i][t + 1], t + 1),
                    );
                }
                None => flag(ch.abs() <= tol && dis.abs() <= tol, format!("battery use without battery at bus {id}")),
            }
        }
        if let Some(b) = &bus.bess {
            flag((d.soc[i][0] - b.initial_energy).abs() <= tol, format!("initial energy at bus {id}"));
            if pol.terminal_soc {
                flag(d.soc[i][horizon] >= b.initial_energy - tol, format!("terminal energy at bus {id}"));
            }
        }
    }

    // tree walk from the root over the undirected line list
    let pos = |id: usize| model.buses.iter().position(|b| b.id == id);
    let root = model.buses.iter().position(|b| b.is_root).unwrap_or(0);
    let mut parent_line: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut stack = vec![root];
    let mut visit = Vec::new();
    seen[root] = true;
    while let Some(u) = stack.pop() {
        visit.push(u);
        for (k, l) in model.lines.iter().enumerate() {
            let (a, b) = (pos(l.from), pos(l.to));
            let other = if a == Some(u) { b } else if b == Some(u) { a } else { None };
            if let Some(v) = other {
                if !seen[v] {
                    seen[v] = true;
                    parent_line[v] = Some((u, k));
                    stack.push(v);
                }
            }
        }
    }

    let (kb, ks) = match pol.loss_convention {
        LossConvention::Literal => (1.0 / pol.market_loss_factor, pol.market_loss_factor),
        LossConvention::Physical => (pol.market_loss_factor, 1.0 / pol.market_loss_factor),
    };
    let v_lo = pol.v_min * pol.v_min;
    let v_hi = pol.v_max * pol.v_max;
    for t in 0..horizon {
        let mut sub_p = vec![0.0; n];
        let mut sub_q = vec![0.0; n];
        for i in 0..n {
            let pv = model.buses[i].pv.as_ref().map_or(0.0, |p| p.generation[t]);
            let market = kb * d.buy[i][t] - ks * d.sell[i][t];
            let battery = d.discharge[i][t] - d.charge[i][t];
            sub_p[i] = demand.p[i][t] - d.curtail_p[i][t] - pv - market - battery;
            sub_q[i] = demand.q[i][t] - d.curtail_q[i][t] - d.pv_q[i][t];
        }
        for &u in visit.iter().rev() {
            if let Some((p, _)) = parent_line[u] {
                sub_p[p] += sub_p[u];
                sub_q[p] += sub_q[u];
            }
        }
        flag(sub_p[root].abs() <= tol, format!("active power balance at the root, hour {t}: {}", sub_p[root]));
        flag((d.v_sq[root][t] - pol.v_root).abs() <= tol, format!("root voltage at hour {t}"));
        for &u in &visit {
            let Some((p, k)) = parent_line[u] else { continue };
            let line = &model.lines[k];
            let id = model.buses[u].id;
            let (fp, fq) = (d.flow_p[k][t], d.flow_q[k][t]);
            flag((fp - sub_p[u]).abs() <= tol, format!("active flow into bus {id} hour {t}: {fp} vs {}", sub_p[u]));
            flag((fq - sub_q[u]).abs() <= tol, format!("reactive flow into bus {id} hour {t}: {fq} vs {}", sub_q[u]));
            let expect = d.v_sq[p][t] - 2.0 * (line.r * fp + line.x * fq) / model.base.mva;
            flag((d.v_sq[u][t] - expect).abs() <= tol, format!("voltage drop to bus {id} hour {t}"));
            flag(
                d.v_sq[u][t] >= v_lo - tol && d.v_sq[u][t] <= v_hi + tol,
                format!("voltage {} at bus {id} hour {t} outside [{v_lo}, {v_hi}]", d.v_sq[u][t]),
            );
        }
    }

    let energy: f64 = (0..n)
        .flat_map(|i| (0..horizon).map(move |t| (i, t)))
        .map(|(i, t)| (pol.buy_price[t] * d.buy[i][t] - pol.sell_price[t] * d.sell[i][t]) * pol.time_step)
        .sum();
    let scale = tol * (1.0 + energy.abs());
    flag((energy - d.cost_energy).abs() <= scale, format!("energy cost {} vs recomputed {energy}", d.cost_energy));
    flag(
        (d.cost_total - d.cost_energy - d.cost_curtail).abs() <= scale,
        "total cost is not energy plus curtailment".into(),
    );
    bad
}
