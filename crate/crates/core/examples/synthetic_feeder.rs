//! Generate a synthetic radial feeder, save it as a network file and time one
//! dispatch solve.
//!
//! cargo run --release --example synthetic_feeder -- 120 /tmp/feeder.json

use std::time::Instant;

use gridsure::network::save_network;
use gridsure::network::synthetic::{radial_feeder, FeederSpec};
use gridsure::opf::{build_opf, check_dispatch, solve};

fn main() -> gridsure::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let buses: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(120);
    let spec = FeederSpec { buses, ..FeederSpec::default() };
    let model = radial_feeder(&spec);
    if let Some(path) = args.next() {
        save_network(&model, &path)?;
        println!("wrote {path}");
    }
    let pv = model.buses.iter().filter(|b| b.pv.is_some()).count();
    let bess = model.buses.iter().filter(|b| b.bess.is_some()).count();
    println!("{} buses, {} lines, {pv} PV plants, {bess} batteries", model.buses.len(), model.lines.len());

    let started = Instant::now();
    let problem = build_opf(&model, None)?;
    let built = started.elapsed();
    let dispatch = solve(&problem)?;
    let total = started.elapsed();
    println!("build {:.2} s, solve {:.2} s", built.as_secs_f64(), (total - built).as_secs_f64());
    println!("cost {:.4} ({} nodes, {} pivots)", dispatch.cost_total, dispatch.nodes, dispatch.lp_iterations);
    let violations = check_dispatch(&model, &problem.demand, &dispatch, 1e-6);
    println!("constraint check: {} violations", violations.len());
    for v in violations.iter().take(10) {
        println!("  {v}");
    }
    Ok(())
}
