//! Curtailment sweep over the penalty coefficient `a` and the one-time
//! incentive implied by the programme's saving.
//!
//! cargo run --release --example incentive -- fixtures/four_bus.json

use gridsure::network::load_network;
use gridsure::opf::{build_opf, compute_one_time_incentive, solve, Incentive};

fn main() -> gridsure::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "fixtures/four_bus.json".into());
    let model = load_network(&path)?;
    let dt = model.policy.time_step;

    println!("{:>8} {:>12} {:>14}", "a", "cost", "curtailed MWh");
    for a in [0.001, 0.01, 0.1, 0.5, 1.0, 5.0] {
        let mut m = model.clone();
        m.policy.curtail_penalty = a;
        let d = solve(&build_opf(&m, None)?)?;
        println!("{a:>8} {:>12.6} {:>14.6}", d.cost_total, d.total_curtailed_energy(dt));
    }

    match compute_one_time_incentive(&model)? {
        Incentive::Value { b, per_bus, cost_with, cost_without, gamma_min } => {
            println!("minimal feasible curtailment fraction {gamma_min:.6}");
            println!("cost without programme {cost_without:.6}, with programme {cost_with:.6}");
            println!("one-time incentive b = {b:.6} ({per_bus:.6} per participating bus)");
        }
        Incentive::Infeasible { cost_with, cost_without, gamma_min } => {
            println!("no positive incentive: with {cost_with:.6} > without {cost_without:.6} (gamma_min {gamma_min:.6})");
        }
    }
    Ok(())
}
