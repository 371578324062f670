//! Steady-state failure probability of the attack lifecycle under both
//! readings of the Vulnerability sojourn.
//!
//! cargo run --example smp_failure -- fixtures/reference_smp.json

use std::time::Instant;

use gridsure::smp::{failure_probability_with, load_smp_spec, SojournReading, STATES};

fn main() -> gridsure::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "fixtures/reference_smp.json".into());
    let spec = load_smp_spec(&path)?;
    for reading in [SojournReading::Survival, SojournReading::Density] {
        let started = Instant::now();
        let r = failure_probability_with(&spec, reading)?;
        println!("{reading:?} reading ({:.2} ms)", started.elapsed().as_secs_f64() * 1e3);
        println!("  k_VD = {:.10}  k_VF = {:.10}", r.kernel_limits.vd, r.kernel_limits.vf);
        println!("  {:>6} {:>10} {:>10} {:>10}", "state", "v", "T [h]", "P");
        for n in 0..5 {
            println!("  {:>6} {:>10.6} {:>10.6} {:>10.6}", STATES[n], r.emc_pi[n], r.sojourn[n], r.state_probs[n]);
        }
        println!("  P_F={:.6}", r.p_fail);
    }
    Ok(())
}
