//! Sample load scenarios inside the uncertainty polytope and summarise the
//! normalised operating cost.
//!
//! cargo run --release --example monte_carlo -- fixtures/fifteen_bus.json 200 7

use std::time::Instant;

use gridsure::network::load_network;
use gridsure::scenario::{run_monte_carlo, McOptions};

fn main() -> gridsure::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "fixtures/fifteen_bus.json".into());
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);
    let model = load_network(&path)?;

    let started = Instant::now();
    let mc = run_monte_carlo(&model, n, seed, &McOptions::default())?;
    let s = &mc.stats;
    println!("nominal cost   {:.4}", mc.nominal_cost);
    println!("samples        {} ({} feasible, {} infeasible, {} failed)", s.count, s.feasible, s.infeasible, s.failed);
    println!("normalised     mean {:.5}  sd {:.5}  min {:.5}  max {:.5}", s.mean, s.stddev, s.min, s.max);
    println!("redraws        total {}  max {}  acceptance {:.3}", s.total_redraws, s.max_redraws, s.acceptance_rate);
    println!("elapsed        {:.2} s", started.elapsed().as_secs_f64());
    Ok(())
}
