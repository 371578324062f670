//! Deterministic synthetic radial feeders for scaling studies and demos.

use super::{Base, BessUnit, Bus, Line, NetworkModel, PvUnit, TariffAndPolicy};

/// Normalised residential-commercial daily load shape (peak 1.0 at 17:00-20:00).
pub const LOAD_SHAPE: [f64; 24] = [
    0.55, 0.5, 0.48, 0.47, 0.48, 0.55, 0.68, 0.8, 0.82, 0.78, 0.75, 0.74, 0.73, 0.72, 0.74, 0.8,
    0.9, 1.0, 1.0, 0.98, 1.0, 0.92, 0.78, 0.65,
];

/// Normalised clear-sky PV output.
pub const PV_SHAPE: [f64; 24] = [
    0.0, 0.0, 0.0, 0.0, 0.0, 0.02, 0.1, 0.25, 0.45, 0.62, 0.75, 0.82, 0.85, 0.8, 0.7, 0.55, 0.35,
    0.15, 0.03, 0.0, 0.0, 0.0, 0.0, 0.0,
];

/// Day-ahead buying price (k€/MWh).
pub const BUY_PRICE: [f64; 24] = [
    0.09, 0.085, 0.08, 0.08, 0.082, 0.09, 0.11, 0.14, 0.15, 0.13, 0.11, 0.10, 0.095, 0.09, 0.095,
    0.11, 0.14, 0.19, 0.24, 0.27, 0.26, 0.2, 0.15, 0.11,
];

/// Selling price as a fraction of the buying price.
pub const SELL_RATIO: f64 = 0.6;

/// Shape of a generated feeder.
#[derive(Debug, Clone)]
pub struct FeederSpec {
    pub buses: usize,
    /// Number of hours, up to 24.
    pub horizon: usize,
    /// Peak active demand of an average load bus (MW).
    pub peak_load: f64,
    /// Reactive-to-active demand ratio.
    pub q_ratio: f64,
    /// Place a PV plant on every n-th bus (0 disables).
    pub pv_every: usize,
    /// Place a battery on every n-th bus (0 disables).
    pub bess_every: usize,
    /// Per-unit resistance and reactance of a typical line.
    pub line_r: f64,
    pub line_x: f64,
    /// Length of the trunk before laterals start branching off.
    pub lateral_len: usize,
}

impl Default for FeederSpec {
    fn default() -> Self {
        Self {
            buses: 120,
            horizon: 24,
            peak_load: 0.05,
            q_ratio: 0.4,
            pv_every: 10,
            bess_every: 20,
            line_r: 0.0006,
            line_x: 0.00045,
            lateral_len: 6,
        }
    }
}

/// Builds a trunk-and-lateral radial feeder: bus 0 is the substation, a trunk
/// runs through every `lateral_len + 1`-th bus and short laterals hang off it.
pub fn radial_feeder(spec: &FeederSpec) -> NetworkModel {
    let n = spec.buses.max(1);
    let horizon = spec.horizon.clamp(1, 24);
    let mut lines = Vec::with_capacity(n.saturating_sub(1));
    let mut trunk_tail = 0;
    let mut lateral_tail = 0;
    for i in 1..n {
        let parent = if (i - 1) % (spec.lateral_len + 1) == 0 {
            let p = trunk_tail;
            trunk_tail = i;
            p
        } else if (i - 1) % (spec.lateral_len + 1) == 1 {
            trunk_tail
        } else {
            lateral_tail
        };
        lateral_tail = i;
        // mild deterministic spread of impedances
        let k = 0.75 + 0.5 * ((i * 37 % 11) as f64 / 10.0);
        lines.push(Line {
            from: parent,
            to: i,
            r: spec.line_r * k,
            x: spec.line_x * k,
        });
    }

    let buses = (0..n)
        .map(|i| {
            let scale = if i == 0 {
                0.0
            } else {
                spec.peak_load * (0.6 + 0.8 * ((i * 53 % 17) as f64 / 16.0))
            };
            let load_p: Vec<f64> = LOAD_SHAPE[..horizon].iter().map(|s| s * scale).collect();
            let load_q = load_p.iter().map(|p| p * spec.q_ratio).collect();
            let pv = (spec.pv_every > 0 && i > 0 && i % spec.pv_every == 0).then(|| {
                let cap = 4.0 * spec.peak_load;
                PvUnit {
                    capacity: vec![1.1 * cap; horizon],
                    generation: PV_SHAPE[..horizon].iter().map(|s| s * cap).collect(),
                }
            });
            let bess = (spec.bess_every > 0 && i > 0 && i % spec.bess_every == 0).then(|| BessUnit {
                capacity: 8.0 * spec.peak_load,
                rate_limit: 2.0 * spec.peak_load,
                efficiency: 0.95,
                initial_energy: 4.0 * spec.peak_load,
            });
            Bus {
                id: i,
                load_p,
                load_q,
                pv,
                bess,
                is_market_node: i == 0,
                is_root: i == 0,
            }
        })
        .collect();

    let buy: Vec<f64> = BUY_PRICE[..horizon].to_vec();
    let sell = buy.iter().map(|b| b * SELL_RATIO).collect();
    NetworkModel {
        base: Base::default(),
        buses,
        lines,
        policy: TariffAndPolicy {
            buy_price: buy,
            sell_price: sell,
            curtail_fraction_max: 0.2,
            curtail_penalty: 0.5,
            delta_bus: 0.3,
            delta_system: 0.1,
            ..TariffAndPolicy::default()
        },
    }
}
