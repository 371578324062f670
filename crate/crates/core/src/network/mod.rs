//! Static grid description: buses, lines, PV and battery placements, tariffs
//! and the scalar policy parameters of the day-ahead cost model.
//!
//! A [`NetworkModel`] is immutable once built and validated. It is read from a
//! JSON document (see `docs/schema.md`) by [`load_network`] and can be written
//! back with [`save_network`].

mod file;
pub mod synthetic;
mod topology;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use file::{load_network, parse_network, save_network, to_json_string, NETWORK_SCHEMA_VERSION};
pub use topology::{validate_radial, OrientedLine, Topology};

/// Per-unit base of the network file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Base {
    /// Apparent power base in MVA; line impedances are per-unit on this base.
    pub mva: f64,
    /// Nominal voltage in kV (informational).
    pub kv: f64,
}

impl Default for Base {
    fn default() -> Self {
        Self { mva: 1.0, kv: 12.66 }
    }
}

/// Inverter-based PV plant.
#[derive(Debug, Clone, PartialEq)]
pub struct PvUnit {
    /// Apparent power capacity per hour (MVA).
    pub capacity: Vec<f64>,
    /// Active generation per hour (MW).
    pub generation: Vec<f64>,
}

impl PvUnit {
    /// Reactive headroom `sqrt(S² - P²)` at hour `t`.
    pub fn reactive_limit(&self, t: usize) -> Result<f64> {
        let s = self.capacity[t];
        let p = self.generation[t];
        let rem = s * s - p * p;
        if rem < -1e-12 {
            return Err(Error::Model(format!(
                "PV generation {p} MW exceeds capacity {s} MVA at hour {t}"
            )));
        }
        Ok(rem.max(0.0).sqrt())
    }
}

/// Battery energy storage system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BessUnit {
    /// Energy capacity (MWh).
    pub capacity: f64,
    /// Charge and discharge power limit (MW).
    pub rate_limit: f64,
    /// Charging efficiency in (0, 1].
    pub efficiency: f64,
    /// Stored energy at the start of the horizon (MWh).
    pub initial_energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: usize,
    /// Nominal active demand per hour (MW).
    pub load_p: Vec<f64>,
    /// Nominal reactive demand per hour (MVar).
    pub load_q: Vec<f64>,
    pub pv: Option<PvUnit>,
    pub bess: Option<BessUnit>,
    pub is_market_node: bool,
    pub is_root: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    /// Resistance (p.u.).
    pub r: f64,
    /// Reactance (p.u.).
    pub x: f64,
}

/// How the market loss factor enters the bus injection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossConvention {
    /// `P_market = P_buy / eta - eta * P_sell`.
    #[default]
    Literal,
    /// `P_market = eta * P_buy - P_sell / eta`.
    Physical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TariffAndPolicy {
    /// Buying price per hour (currency/MWh).
    pub buy_price: Vec<f64>,
    /// Selling price per hour (currency/MWh).
    pub sell_price: Vec<f64>,
    pub market_loss_factor: f64,
    pub loss_convention: LossConvention,
    /// Maximum curtailment fraction `gamma` of each bus demand.
    pub curtail_fraction_max: f64,
    /// Curtailment compensation slope `a`.
    pub curtail_penalty: f64,
    /// One-time curtailment incentive `b`, charged once per participating bus.
    pub one_time_incentive: f64,
    /// Per-bus load variation bound `delta`.
    pub delta_bus: f64,
    /// System-wide hourly variation budget `Delta`.
    pub delta_system: f64,
    /// Length of one period in hours.
    pub time_step: f64,
    /// Voltage magnitude bounds (p.u.).
    pub v_min: f64,
    pub v_max: f64,
    /// Squared voltage at the root bus (p.u.²).
    pub v_root: f64,
    /// Require the final state of charge to be at least the initial one.
    pub terminal_soc: bool,
}

impl Default for TariffAndPolicy {
    fn default() -> Self {
        Self {
            buy_price: Vec::new(),
            sell_price: Vec::new(),
            market_loss_factor: 1.0,
            loss_convention: LossConvention::Literal,
            curtail_fraction_max: 0.0,
            curtail_penalty: 0.0,
            one_time_incentive: 0.0,
            delta_bus: 0.0,
            delta_system: 0.0,
            time_step: 1.0,
            v_min: 0.94,
            v_max: 1.06,
            v_root: 1.0,
            terminal_soc: true,
        }
    }
}

/// Complete static description of a radial distribution grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub base: Base,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub policy: TariffAndPolicy,
}

impl NetworkModel {
    /// Number of periods in the horizon.
    pub fn horizon(&self) -> usize {
        self.policy.buy_price.len()
    }

    pub fn root_index(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.is_root)
    }

    /// Position of the bus with the given id.
    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    /// Hourly total nominal active demand.
    pub fn total_demand_p(&self, t: usize) -> f64 {
        self.buses.iter().map(|b| b.load_p[t]).sum()
    }

    /// Hourly total nominal reactive demand.
    pub fn total_demand_q(&self, t: usize) -> f64 {
        self.buses.iter().map(|b| b.load_q[t]).sum()
    }

    /// Checks every structural invariant and returns the radial topology.
    pub fn validate(&self) -> Result<Topology> {
        let horizon = self.horizon();
        if horizon == 0 {
            return Err(Error::Validation("price profile is empty".into()));
        }
        let pol = &self.policy;
        if pol.sell_price.len() != horizon {
            return Err(Error::Validation(format!(
                "sell price has {} entries, buy price has {horizon}",
                pol.sell_price.len()
            )));
        }
        if !(self.base.mva > 0.0) {
            return Err(Error::Validation("base MVA must be positive".into()));
        }
        check_range("market_loss_factor", pol.market_loss_factor, f64::MIN_POSITIVE, 1.0)?;
        check_range("curtail_fraction_max", pol.curtail_fraction_max, 0.0, 1.0)?;
        check_range("delta_bus", pol.delta_bus, 0.0, 1.0)?;
        check_range("delta_system", pol.delta_system, 0.0, 1.0)?;
        if !(pol.curtail_penalty >= 0.0) {
            return Err(Error::Validation("curtail_penalty must be non-negative".into()));
        }
        if !(pol.time_step > 0.0) {
            return Err(Error::Validation("time_step must be positive".into()));
        }
        if !(pol.v_min < pol.v_max) {
            return Err(Error::Validation(format!(
                "v_min {} must be below v_max {}",
                pol.v_min, pol.v_max
            )));
        }
        if !(pol.v_root > 0.0) {
            return Err(Error::Validation("v_root must be positive".into()));
        }

        let roots = self.buses.iter().filter(|b| b.is_root).count();
        if roots != 1 {
            return Err(Error::Validation(format!(
                "exactly one root bus required, found {roots}"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for bus in &self.buses {
            if !seen.insert(bus.id) {
                return Err(Error::Validation(format!("duplicate bus id {}", bus.id)));
            }
            bus.validate(horizon)?;
        }
        for (k, line) in self.lines.iter().enumerate() {
            if !(line.r >= 0.0 && line.x >= 0.0) {
                return Err(Error::Validation(format!(
                    "line {k} ({}->{}) has negative impedance",
                    line.from, line.to
                )));
            }
        }
        validate_radial(self)
    }

    /// Non-fatal configuration concerns.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let pol = &self.policy;
        for (t, (b, s)) in pol.buy_price.iter().zip(&pol.sell_price).enumerate() {
            if s > b {
                out.push(format!(
                    "hour {t}: sell price {s} exceeds buy price {b} (arbitrage loop)"
                ));
            }
        }
        if pol.delta_bus < pol.delta_system {
            out.push(format!(
                "delta_bus {} is below delta_system {}; the system budget never binds",
                pol.delta_bus, pol.delta_system
            ));
        }
        out
    }

    /// Buses eligible for the curtailment programme (positive demand in some
    /// hour and a non-zero curtailment fraction).
    pub fn curtailment_participants(&self) -> usize {
        if self.policy.curtail_fraction_max <= 0.0 {
            return 0;
        }
        self.buses
            .iter()
            .filter(|b| b.load_p.iter().any(|&p| p > 0.0))
            .count()
    }
}

impl Bus {
    fn validate(&self, horizon: usize) -> Result<()> {
        let id = self.id;
        let len_check = |name: &str, v: &[f64]| -> Result<()> {
            if v.len() != horizon {
                return Err(Error::Validation(format!(
                    "bus {id}: {name} has {} entries, expected {horizon}",
                    v.len()
                )));
            }
            Ok(())
        };
        len_check("load_p", &self.load_p)?;
        len_check("load_q", &self.load_q)?;
        if let Some(t) = self.load_p.iter().position(|&p| !(p >= 0.0)) {
            return Err(Error::Validation(format!(
                "bus {id}: negative active demand at hour {t}"
            )));
        }
        if let Some(pv) = &self.pv {
            len_check("pv capacity", &pv.capacity)?;
            len_check("pv generation", &pv.generation)?;
            for t in 0..horizon {
                let (s, p) = (pv.capacity[t], pv.generation[t]);
                if !(p >= 0.0) {
                    return Err(Error::Validation(format!(
                        "bus {id}: negative PV generation {p} at hour {t}"
                    )));
                }
                if !(p <= s) {
                    return Err(Error::Model(format!(
                        "bus {id}: PV generation {p} MW exceeds capacity {s} MVA at hour {t}"
                    )));
                }
            }
        }
        if let Some(b) = &self.bess {
            if !(b.capacity >= 0.0) {
                return Err(Error::Validation(format!("bus {id}: negative BESS capacity")));
            }
            if !(b.rate_limit > 0.0) {
                return Err(Error::Validation(format!(
                    "bus {id}: BESS rate limit must be positive"
                )));
            }
            if !(b.efficiency > 0.0 && b.efficiency <= 1.0) {
                return Err(Error::Validation(format!(
                    "bus {id}: BESS efficiency must lie in (0, 1]"
                )));
            }
            if !(b.initial_energy >= 0.0 && b.initial_energy <= b.capacity) {
                return Err(Error::Validation(format!(
                    "bus {id}: BESS initial energy outside [0, capacity]"
                )));
            }
        }
        Ok(())
    }
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if v >= lo && v <= hi {
        Ok(())
    } else {
        Err(Error::Validation(format!("{name} = {v} outside [{lo}, {hi}]")))
    }
}
