//! Load-altering attacks of growing reach: demand on nested bus sets is
//! scaled at one evening hour and the dispatch is re-solved.
//!
//! cargo run --release --example laa_attack -- fixtures/fifteen_bus.json 20 1.3

use gridsure::network::load_network;
use gridsure::opf::{build_opf, solve};
use gridsure::scenario::apply_laa;

fn main() -> gridsure::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| "fixtures/fifteen_bus.json".into());
    let hour: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let scale: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1.3);
    let model = load_network(&path)?;
    let nominal = solve(&build_opf(&model, None)?)?.cost_total;
    println!("nominal cost {nominal:.4}");

    let victims: Vec<usize> = model.buses.iter().filter(|b| !b.is_root).map(|b| b.id).collect();
    for reach in [victims.len() / 4, victims.len() / 2, victims.len()] {
        let buses = &victims[..reach.max(1)];
        let attack = apply_laa(&model, buses, hour, scale)?;
        let cost = solve(&build_opf(&model, Some(&attack.demand(&model)))?)?.cost_total;
        println!(
            "{:>3} buses x{scale} at t={hour}: cost {cost:.4} ({:+.3}%)",
            buses.len(),
            100.0 * (cost / nominal - 1.0)
        );
    }
    Ok(())
}
