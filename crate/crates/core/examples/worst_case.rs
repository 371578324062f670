//! Search the vertices of the uncertainty polytope for the load variation that
//! drives the operating cost highest.
//!
//! cargo run --release --example worst_case -- fixtures/four_bus.json

use std::time::Instant;

use gridsure::network::load_network;
use gridsure::scenario::{worst_case, WorstCaseConfig};

fn main() -> gridsure::Result<()> {
    env_logger::init();
    let path = std::env::args().nth(1).unwrap_or_else(|| "fixtures/four_bus.json".into());
    let model = load_network(&path)?;
    let started = Instant::now();
    let wc = worst_case(&model, &WorstCaseConfig::default())?;
    println!("nominal cost     {:.4}", wc.nominal_cost);
    println!("worst-case cost  {:.4} (relaxed {:.4})", wc.cost, wc.relaxed_cost);
    println!("ratio            {:.4}", wc.cost / wc.nominal_cost);
    println!("restarts         {:?}", wc.restart_costs.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>());
    println!("certified        {}", wc.certified);
    println!("evaluations      {} in {:.2} s", wc.evaluations, started.elapsed().as_secs_f64());
    for (bus, row) in model.buses.iter().zip(&wc.pattern) {
        if row.iter().any(|&s| s != 0) {
            let signs: String = row.iter().map(|&s| match s { 1 => '+', -1 => '-', _ => '0' }).collect();
            println!("  bus {:>4}  {signs}", bus.id);
        }
    }
    Ok(())
}
