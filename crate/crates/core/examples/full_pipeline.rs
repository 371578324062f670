//! Run every stage from a network file to a premium quote.
//!
//! cargo run --release --example full_pipeline -- fixtures/four_bus.json fixtures/reference_smp.json /tmp/quote

use gridsure::pipeline::{run_pipeline, summary, PipelineConfig};

fn main() -> gridsure::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let network = args.next().unwrap_or_else(|| "fixtures/four_bus.json".into());
    let smp = args.next().unwrap_or_else(|| "fixtures/reference_smp.json".into());
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("gridsure-quote").display().to_string());

    let mut config = PipelineConfig::new(&network, &out);
    config.smp_spec_path = Some(smp.into());
    config.mc_samples = 200;
    config.master_seed = 7;
    let report = run_pipeline(&config)?;
    print!("{}", summary(&report));
    println!("report written to {out}/report.json");
    Ok(())
}
