mod common;

use std::path::Path;

use gridsure::lp::{write_lp, StandardForm};
use gridsure::network::{parse_network, NetworkModel};
use gridsure::opf::{
    build_opf, build_opf_with, check_dispatch, compute_one_time_incentive, curtailment_cost, minimal_curtailment_fraction,
    segment_error_bound, solve, Demand, Formulation, Incentive, OpfOptions,
};
use gridsure::Error;
use serde_json::{json, Value};

use common::{load, rel_diff};

fn two_bus(buy: [f64; 4], bess: Option<Value>) -> NetworkModel {
    let mut load_bus = json!({"id": 1, "p_demand": [1.0, 1.0, 1.0, 1.0], "q_demand": [0.0, 0.0, 0.0, 0.0]});
    if let Some(b) = bess {
        load_bus["bess"] = b;
    }
    let text = json!({
        "schema_version": 1,
        "policy": {
            "prices": {"buy": buy, "sell": buy.map(|p| 0.5 * p)},
            "v_min": 0.9, "v_max": 1.1
        },
        "buses": [{"id": 0, "root": true}, load_bus],
        "lines": [{"from": 0, "to": 1, "r": 0.001, "x": 0.001}],
    })
    .to_string();
    parse_network(&text, Path::new("two_bus.json")).unwrap()
}

fn solve_model(m: &NetworkModel) -> gridsure::opf::DispatchSolution {
    solve(&build_opf(m, None).unwrap()).unwrap()
}

#[test]
fn island_with_no_demand_costs_nothing() {
    let text = json!({
        "schema_version": 1,
        "policy": {"prices": {"buy": [0.1, 0.2], "sell": [0.05, 0.1]}, "v_min": 0.9, "v_max": 1.1},
        "buses": [{"id": 0, "root": true}],
    })
    .to_string();
    let m = parse_network(&text, Path::new("island.json")).unwrap();
    let d = solve_model(&m);
    assert_eq!(d.cost_total, 0.0);
    assert!(d.buy.iter().chain(&d.sell).flatten().all(|&v| v == 0.0));
}

#[test]
fn flat_demand_is_bought_every_hour() {
    let buy = [0.1, 0.12, 0.05, 0.2];
    let m = two_bus(buy, None);
    let d = solve_model(&m);
    for t in 0..4 {
        assert!((d.buy[0][t] - 1.0).abs() < 1e-9);
        assert!(d.sell[0][t].abs() < 1e-9);
    }
    assert!((d.cost_total - buy.iter().sum::<f64>()).abs() < 1e-9);
    assert!(d.curtail_p.iter().flatten().all(|&v| v == 0.0));
}

#[test]
fn battery_shifts_energy_into_the_price_valley() {
    let buy = [0.1, 0.12, 0.05, 0.2];
    let plain = solve_model(&two_bus(buy, None));
    let with = two_bus(
        buy,
        Some(json!({"capacity": 10.0, "rate_limit": 1.0, "efficiency": 1.0, "initial_energy": 0.0})),
    );
    let d = solve_model(&with);
    let b = with.bus_index(1).unwrap();
    assert!(d.charge[b][2] > 0.5, "charges at the valley: {:?}", d.charge[b]);
    assert!(d.discharge[b][3] > 0.5, "discharges at the peak: {:?}", d.discharge[b]);
    assert!(d.cost_total < plain.cost_total - 1e-6);
}

#[test]
fn voltage_band_too_tight_is_infeasible() {
    let mut m = load("four_bus.json");
    m.policy.v_min = 0.999;
    m.policy.v_max = 1.0;
    match solve(&build_opf(&m, None).unwrap()) {
        Err(Error::Infeasible(msg)) => assert!(!msg.is_empty()),
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn selling_above_buying_is_unbounded() {
    let text = json!({
        "schema_version": 1,
        "policy": {"prices": {"buy": [0.1], "sell": [0.2]}, "v_min": 0.9, "v_max": 1.1},
        "buses": [{"id": 0, "root": true}, {"id": 1, "p_demand": [0.5], "q_demand": [0.0]}],
        "lines": [{"from": 0, "to": 1, "r": 0.01, "x": 0.01}],
    })
    .to_string();
    let m = parse_network(&text, Path::new("arb.json")).unwrap();
    assert!(matches!(solve(&build_opf(&m, None).unwrap()), Err(Error::Unbounded(_))));
}

#[test]
fn pv_over_capacity_is_a_model_error() {
    let mut m = load("four_bus.json");
    let i = m.buses.iter().position(|b| b.pv.is_some()).unwrap();
    m.buses[i].pv.as_mut().unwrap().generation[0] = 10.0;
    assert!(matches!(build_opf(&m, None), Err(Error::Model(_))));
}

#[test]
fn curtailment_cost_examples() {
    assert_eq!(curtailment_cost(1.0, 0.0, 4.0, 0.0).unwrap(), 0.0);
    assert_eq!(curtailment_cost(1.0, 0.0, 4.0, 3.0).unwrap(), 1.0);
    assert_eq!(curtailment_cost(2.0, 5.0, 9.0, 9.0).unwrap(), 11.0);
    assert!(matches!(curtailment_cost(1.0, 0.0, 4.0, 5.0), Err(Error::Domain(_))));
}

#[test]
fn dispatches_pass_the_independent_constraint_check() {
    for name in ["two_bus.json", "four_bus.json", "fifteen_bus.json"] {
        let m = load(name);
        let p = build_opf(&m, None).unwrap();
        let d = solve(&p).unwrap();
        let bad = check_dispatch(&m, &p.demand, &d, 1e-6);
        assert!(bad.is_empty(), "{name}: {bad:?}");
        assert!((d.cost_total - d.cost_energy - d.cost_curtail).abs() < 1e-9);
        for (c, dis) in d.charge.iter().flatten().zip(d.discharge.iter().flatten()) {
            assert!(c * dis < 1e-12, "{name}: simultaneous charge {c} and discharge {dis}");
        }
        for i in 0..m.buses.len() {
            for t in 0..m.horizon() {
                if d.charge_mode[i][t] == 0 {
                    assert!(d.charge[i][t] < 1e-9);
                } else {
                    assert!(d.discharge[i][t] < 1e-9);
                }
            }
        }
    }
}

#[test]
fn both_formulations_agree() {
    for name in ["four_bus.json", "fifteen_bus.json"] {
        let m = load(name);
        let sub = solve(&build_opf(&m, None).unwrap()).unwrap();
        let opts = OpfOptions { formulation: Formulation::Explicit, ..OpfOptions::default() };
        let p = build_opf_with(&m, None, &opts).unwrap();
        let exp = solve(&p).unwrap();
        assert!(rel_diff(exp.cost_total, sub.cost_total) < 1e-6, "{name}: {} vs {}", exp.cost_total, sub.cost_total);
        assert!(check_dispatch(&m, &p.demand, &exp, 1e-6).is_empty());
    }
}

#[test]
fn nominal_cost_matches_the_grid_oracle_on_the_two_bus_case() {
    let m = load("two_bus.json");
    let d = solve_model(&m);
    let oracle = common::brute_force_cost(&m, 0.01);
    assert!(rel_diff(d.cost_total, oracle) < 1e-9, "{} vs {oracle}", d.cost_total);
}

/// Piecewise objective minus the exact curtailment cost at the returned schedule.
fn convexification_gap(m: &NetworkModel, k: usize) -> (f64, f64) {
    let opts = OpfOptions { breakpoints: k, ..OpfOptions::default() };
    let p = build_opf_with(m, None, &opts).unwrap();
    let d = solve(&p).unwrap();
    let mut bound = 0.0;
    let gamma = m.policy.curtail_fraction_max;
    for (i, b) in m.buses.iter().enumerate() {
        for t in 0..m.horizon() {
            let dem = b.load_p[t];
            if dem <= 0.0 {
                continue;
            }
            // worst interpolation error over the segment holding the curtailment
            let s_lo = (dem * (1.0 - gamma)).sqrt();
            let s = (dem - d.curtail_p[i][t]).max(0.0).sqrt();
            let w = (dem.sqrt() - s_lo) / k as f64;
            let j = (((dem.sqrt() - s) / w).floor() as usize).min(k - 1);
            let s0 = dem.sqrt() - j as f64 * w;
            let s1 = s0 - w;
            bound += segment_error_bound(m.policy.curtail_penalty, dem, dem - s0 * s0, dem - s1 * s1);
        }
    }
    (d.lp_objective - d.cost_total, bound)
}

#[test]
fn piecewise_gap_is_bounded_and_shrinks_with_more_breakpoints() {
    let mut m = load("fifteen_bus.json");
    m.policy.curtail_penalty = 0.1;
    let (g16, bound16) = convexification_gap(&m, 16);
    let (g32, _) = convexification_gap(&m, 32);
    assert!(g16 >= -1e-9 && g16 <= bound16 + 1e-9, "gap {g16} bound {bound16}");
    assert!(g32 <= 0.5 * g16 + 1e-9, "K=16 gap {g16}, K=32 gap {g32}");
}

#[test]
fn curtailed_energy_falls_as_the_penalty_rises() {
    let base = load("four_bus.json");
    let mut last = f64::INFINITY;
    for a in [0.001, 0.01, 0.1, 0.5, 1.0, 5.0] {
        let mut m = base.clone();
        m.policy.curtail_penalty = a;
        let e = solve_model(&m).total_curtailed_energy(m.policy.time_step);
        assert!(e <= last + 1e-6, "a = {a}: {e} > {last}");
        last = e;
    }
}

fn lp_value(m: &NetworkModel, d: &Demand) -> f64 {
    let mut opts = OpfOptions::default();
    opts.solver.relax_integrality = true;
    solve(&build_opf_with(m, Some(d), &opts).unwrap()).unwrap().lp_objective
}

#[test]
fn lp_value_is_convex_along_demand_segments() {
    let m = load("four_bus.json");
    let nominal = Demand::nominal(&m);
    let scaled = |f: &dyn Fn(usize, usize) -> f64| Demand {
        p: nominal.p.iter().enumerate().map(|(i, r)| r.iter().enumerate().map(|(t, v)| v * f(i, t)).collect()).collect(),
        q: nominal.q.iter().enumerate().map(|(i, r)| r.iter().enumerate().map(|(t, v)| v * f(i, t)).collect()).collect(),
    };
    let a = scaled(&|i, t| 1.0 + 0.1 * ((i + t) % 2) as f64);
    let b = scaled(&|i, t| 1.0 - 0.1 * ((i * 3 + t) % 2) as f64 + 0.05 * t as f64);
    let (ca, cb) = (lp_value(&m, &a), lp_value(&m, &b));
    for w in [0.25, 0.5, 0.75] {
        let mix = scaled(&|i, t| {
            let fa = a.p[i][t] / nominal.p[i][t].max(1e-300);
            let fb = b.p[i][t] / nominal.p[i][t].max(1e-300);
            if nominal.p[i][t] == 0.0 { 1.0 } else { (1.0 - w) * fa + w * fb }
        });
        let c = lp_value(&m, &mix);
        assert!(c <= (1.0 - w) * ca + w * cb + 1e-9, "w = {w}: {c} above chord");
    }
}

#[test]
fn incentive_equals_the_two_solve_gap() {
    let mut m = load("fifteen_bus.json");
    m.policy.curtail_penalty = 0.01;
    let inc = compute_one_time_incentive(&m).unwrap();
    let g = minimal_curtailment_fraction(&m, &OpfOptions::default()).unwrap();
    let mut baseline = m.clone();
    baseline.policy.curtail_fraction_max = g;
    baseline.policy.curtail_penalty = 0.0;
    let without = solve_model(&baseline).cost_total;
    let with = solve_model(&m).cost_total;
    match inc {
        Incentive::Value { b, cost_with, cost_without, .. } => {
            assert!((cost_without - without).abs() < 1e-9);
            assert!((cost_with - with).abs() < 1e-9);
            assert!((b - (without - with)).abs() < 1e-9);
        }
        other => panic!("expected a value, got {other:?}"),
    }
}

#[test]
fn unused_curtailment_gives_zero_incentive() {
    let m = load("two_bus.json");
    assert_eq!(compute_one_time_incentive(&m).unwrap().value(), Some(0.0));
}

#[test]
fn expensive_compensation_yields_the_infeasible_marker() {
    let mut m = load("four_bus.json");
    m.policy.curtail_penalty = 0.5;
    match compute_one_time_incentive(&m).unwrap() {
        Incentive::Infeasible { cost_with, cost_without, gamma_min } => {
            assert!(cost_with > cost_without);
            assert!(gamma_min > 0.0);
        }
        other => panic!("expected the infeasible marker, got {other:?}"),
    }
    m.policy.curtail_penalty = 0.001;
    assert!(compute_one_time_incentive(&m).unwrap().value().unwrap() > 0.0);
}

#[test]
fn one_time_incentive_is_charged_per_participating_bus() {
    let mut m = load("four_bus.json");
    let base = solve_model(&m).cost_total;
    m.policy.one_time_incentive = 0.25;
    let p = build_opf(&m, None).unwrap();
    let d = solve(&p).unwrap();
    assert_eq!(p.participants(), 3);
    assert!((d.cost_total - base - 0.75).abs() < 1e-9);
}

#[test]
fn lp_dump_names_every_variable() {
    let m = load("four_bus.json");
    let p = build_opf(&m, None).unwrap();
    let form = StandardForm::compile(&p.lp).unwrap();
    let text = write_lp(&form);
    // LP identifiers keep only alphanumerics and `_ . [ ]`
    let ident = |s: &str| -> String {
        s.chars().map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' }).collect()
    };
    for c in 0..form.n_cols() {
        assert!(text.contains(&ident(form.col_name(c))), "{} missing", form.col_name(c));
    }
    for r in 0..form.n_rows() {
        assert!(text.contains(&ident(form.row_name(r))), "{} missing", form.row_name(r));
    }
}
