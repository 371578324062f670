//! JSON network document: reading, resolving named profiles, writing.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Base, BessUnit, Bus, Line, LossConvention, NetworkModel, PvUnit, TariffAndPolicy};
use crate::error::{Error, Result};

pub const NETWORK_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    schema_version: u32,
    #[serde(default)]
    base: Base,
    policy: PolicyFile,
    buses: Vec<BusFile>,
    #[serde(default)]
    lines: Vec<Line>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    profiles: BTreeMap<String, Vec<f64>>,
    /// Optional semi-Markov section; read by the reliability module, ignored here.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    smp: Option<serde_json::Value>,
}

/// A per-hour series: either explicit values or a named profile times a scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Series {
    Values(Vec<f64>),
    Scaled { profile: String, scale: f64 },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Prices {
    Inline { buy: Series, sell: Series },
    Csv { csv: String },
}

fn default_one() -> f64 {
    1.0
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    prices: Prices,
    #[serde(default = "default_one")]
    market_loss_factor: f64,
    #[serde(default)]
    loss_convention: LossConvention,
    #[serde(default)]
    curtail_fraction_max: f64,
    #[serde(default)]
    curtail_penalty: f64,
    #[serde(default)]
    one_time_incentive: f64,
    #[serde(default)]
    delta_bus: f64,
    #[serde(default)]
    delta_system: f64,
    #[serde(default = "default_one")]
    time_step: f64,
    v_min: f64,
    v_max: f64,
    #[serde(default = "default_one")]
    v_root: f64,
    #[serde(default = "default_true")]
    terminal_soc: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PvFile {
    capacity: Series,
    generation: Series,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusFile {
    id: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    root: bool,
    /// Defaults to `root` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    market: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_demand: Option<Series>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q_demand: Option<Series>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pv: Option<PvFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bess: Option<BessUnit>,
}

struct Resolver<'a> {
    profiles: &'a BTreeMap<String, Vec<f64>>,
}

impl Resolver<'_> {
    fn series(&self, s: &Series, what: &str) -> Result<Vec<f64>> {
        match s {
            Series::Values(v) => Ok(v.clone()),
            Series::Scaled { profile, scale } => self
                .profiles
                .get(profile)
                .map(|p| p.iter().map(|x| x * scale).collect())
                .ok_or_else(|| Error::Validation(format!("{what}: unknown profile '{profile}'"))),
        }
    }
}

#[derive(Debug, Deserialize)]
struct PriceRow {
    hour: f64,
    buy: f64,
    sell: f64,
}

fn read_price_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::parse(path, e))?;
    let mut rows: Vec<PriceRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(path, e))?;
    rows.sort_by(|a, b| a.hour.total_cmp(&b.hour));
    Ok((
        rows.iter().map(|r| r.buy).collect(),
        rows.iter().map(|r| r.sell).collect(),
    ))
}

/// Parses a network document. `base_dir` resolves relative CSV references.
pub fn parse_network(text: &str, origin: &Path) -> Result<NetworkModel> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::parse(origin, e))?;
    if file.schema_version != NETWORK_SCHEMA_VERSION {
        return Err(Error::parse(
            origin,
            format!(
                "unsupported schema_version {} (expected {NETWORK_SCHEMA_VERSION})",
                file.schema_version
            ),
        ));
    }
    let resolver = Resolver {
        profiles: &file.profiles,
    };

    let (buy_price, sell_price) = match &file.policy.prices {
        Prices::Inline { buy, sell } => (
            resolver.series(buy, "buy price")?,
            resolver.series(sell, "sell price")?,
        ),
        Prices::Csv { csv } => {
            let dir = origin.parent().unwrap_or_else(|| Path::new("."));
            read_price_csv(&dir.join(csv))?
        }
    };
    let horizon = buy_price.len();
    let p = &file.policy;
    let policy = TariffAndPolicy {
        buy_price,
        sell_price,
        market_loss_factor: p.market_loss_factor,
        loss_convention: p.loss_convention,
        curtail_fraction_max: p.curtail_fraction_max,
        curtail_penalty: p.curtail_penalty,
        one_time_incentive: p.one_time_incentive,
        delta_bus: p.delta_bus,
        delta_system: p.delta_system,
        time_step: p.time_step,
        v_min: p.v_min,
        v_max: p.v_max,
        v_root: p.v_root,
        terminal_soc: p.terminal_soc,
    };

    let mut buses = Vec::with_capacity(file.buses.len());
    for b in &file.buses {
        let what = |field: &str| format!("bus {} {field}", b.id);
        let zeros = || vec![0.0; horizon];
        let load_p = match &b.p_demand {
            Some(s) => resolver.series(s, &what("p_demand"))?,
            None => zeros(),
        };
        let load_q = match &b.q_demand {
            Some(s) => resolver.series(s, &what("q_demand"))?,
            None => zeros(),
        };
        let pv = match &b.pv {
            Some(pv) => Some(PvUnit {
                capacity: resolver.series(&pv.capacity, &what("pv capacity"))?,
                generation: resolver.series(&pv.generation, &what("pv generation"))?,
            }),
            None => None,
        };
        buses.push(Bus {
            id: b.id,
            load_p,
            load_q,
            pv,
            bess: b.bess,
            is_market_node: b.market.unwrap_or(b.root),
            is_root: b.root,
        });
    }

    let model = NetworkModel {
        base: file.base,
        buses,
        lines: file.lines,
        policy,
    };
    model.validate()?;
    for w in model.warnings() {
        log::warn!("{}: {w}", origin.display());
    }
    Ok(model)
}

/// Reads and validates a network document from disk.
pub fn load_network(path: impl AsRef<Path>) -> Result<NetworkModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_network(&text, path)
}

/// Serializes a model with every series written out explicitly.
pub fn to_json_string(model: &NetworkModel) -> String {
    let values = |v: &[f64]| Some(Series::Values(v.to_vec()));
    let file = NetworkFile {
        schema_version: NETWORK_SCHEMA_VERSION,
        base: model.base,
        policy: PolicyFile {
            prices: Prices::Inline {
                buy: Series::Values(model.policy.buy_price.clone()),
                sell: Series::Values(model.policy.sell_price.clone()),
            },
            market_loss_factor: model.policy.market_loss_factor,
            loss_convention: model.policy.loss_convention,
            curtail_fraction_max: model.policy.curtail_fraction_max,
            curtail_penalty: model.policy.curtail_penalty,
            one_time_incentive: model.policy.one_time_incentive,
            delta_bus: model.policy.delta_bus,
            delta_system: model.policy.delta_system,
            time_step: model.policy.time_step,
            v_min: model.policy.v_min,
            v_max: model.policy.v_max,
            v_root: model.policy.v_root,
            terminal_soc: model.policy.terminal_soc,
        },
        buses: model
            .buses
            .iter()
            .map(|b| BusFile {
                id: b.id,
                root: b.is_root,
                market: Some(b.is_market_node),
                p_demand: values(&b.load_p),
                q_demand: values(&b.load_q),
                pv: b.pv.as_ref().map(|pv| PvFile {
                    capacity: Series::Values(pv.capacity.clone()),
                    generation: Series::Values(pv.generation.clone()),
                }),
                bess: b.bess,
            })
            .collect(),
        lines: model.lines.clone(),
        profiles: BTreeMap::new(),
        smp: None,
    };
    serde_json::to_string_pretty(&file).expect("network document serializes")
}

pub fn save_network(model: &NetworkModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_json_string(model)).map_err(|e| Error::io(path, e))
}
