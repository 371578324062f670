//! Solve the day-ahead dispatch of a network file and print a summary.
//!
//! cargo run --example opf_dispatch -- fixtures/fifteen_bus.json

use std::time::Instant;

use gridsure::network::load_network;
use gridsure::opf::{build_opf, check_dispatch, solve};

fn main() -> gridsure::Result<()> {
    env_logger::init();
    let path = std::env::args().nth(1).unwrap_or_else(|| "fixtures/fifteen_bus.json".into());
    let model = load_network(&path)?;
    let started = Instant::now();
    let problem = build_opf(&model, None)?;
    let dispatch = solve(&problem)?;
    let elapsed = started.elapsed();

    let horizon = model.horizon();
    println!("network      {path} ({} buses, {horizon} hours)", model.buses.len());
    println!("total cost   {:.4}", dispatch.cost_total);
    println!("  energy     {:.4}", dispatch.cost_energy);
    println!("  curtail    {:.4}", dispatch.cost_curtail);
    println!("curtailed    {:.4} MWh", dispatch.total_curtailed_energy(model.policy.time_step));
    let v_min = dispatch.v_sq.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let v_max = dispatch.v_sq.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    println!("voltage      [{:.4}, {:.4}] p.u.", v_min.sqrt(), v_max.sqrt());
    println!("solve        {:.1} ms, {} nodes, {} pivots", elapsed.as_secs_f64() * 1e3, dispatch.nodes, dispatch.lp_iterations);

    for t in 0..horizon {
        let buy: f64 = dispatch.buy.iter().map(|r| r[t]).sum();
        let sell: f64 = dispatch.sell.iter().map(|r| r[t]).sum();
        let battery: f64 = dispatch.discharge.iter().zip(&dispatch.charge).map(|(d, c)| d[t] - c[t]).sum();
        let curtail: f64 = dispatch.curtail_p.iter().map(|r| r[t]).sum();
        println!("  t={t:>2}  buy {buy:7.4}  sell {sell:7.4}  battery {battery:+7.4}  curtail {curtail:7.4}");
    }

    let violations = check_dispatch(&model, &problem.demand, &dispatch, 1e-6);
    if violations.is_empty() {
        println!("independent constraint check: ok");
    } else {
        for v in violations {
            println!("violation: {v}");
        }
    }
    Ok(())
}
