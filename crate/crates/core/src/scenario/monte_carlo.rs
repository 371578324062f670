use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sample_indexed;
use crate::error::{Error, Result};
use crate::network::NetworkModel;
use crate::opf::{build_opf_with, solve_warm, OpfOptions};

#[derive(Debug, Clone, Copy, Default)]
pub struct McOptions {
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
    pub opf: OpfOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Failed,
}

impl std::str::FromStr for SolveStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "optimal" => Ok(Self::Optimal),
            "infeasible" => Ok(Self::Infeasible),
            "failed" => Ok(Self::Failed),
            other => Err(Error::Validation(format!("unknown sample status '{other}'"))),
        }
    }
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CostSample {
    pub scenario_id: usize,
    pub seed: u64,
    /// Optimal cost, NaN unless `status` is optimal.
    pub cost: f64,
    pub cost_normalized: f64,
    pub status: SolveStatus,
    /// Whole-scenario redraws spent meeting the system budget.
    pub redraws: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SampleStats {
    pub count: usize,
    pub feasible: usize,
    pub infeasible: usize,
    pub failed: usize,
    /// Moments of `cost_normalized` over feasible samples.
    pub mean: f64,
    pub stddev: f64,
    pub min: f64,
    pub max: f64,
    pub total_redraws: usize,
    pub max_redraws: usize,
    /// Accepted draws over total draws.
    pub acceptance_rate: f64,
}

impl SampleStats {
    pub fn from_samples(samples: &[CostSample]) -> Self {
        let ok: Vec<f64> = samples
            .iter()
            .filter(|s| s.status == SolveStatus::Optimal)
            .map(|s| s.cost_normalized)
            .collect();
        let n = ok.len() as f64;
        let mean = ok.iter().sum::<f64>() / n;
        let var = if ok.len() > 1 {
            ok.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let total_redraws: usize = samples.iter().map(|s| s.redraws).sum();
        Self {
            count: samples.len(),
            feasible: ok.len(),
            infeasible: samples.iter().filter(|s| s.status == SolveStatus::Infeasible).count(),
            failed: samples.iter().filter(|s| s.status == SolveStatus::Failed).count(),
            mean,
            stddev: var.sqrt(),
            min: ok.iter().cloned().fold(f64::INFINITY, f64::min),
            max: ok.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            total_redraws,
            max_redraws: samples.iter().map(|s| s.redraws).max().unwrap_or(0),
            acceptance_rate: samples.len() as f64 / (samples.len() + total_redraws).max(1) as f64,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McResult {
    pub nominal_cost: f64,
    pub samples: Vec<CostSample>,
    pub stats: SampleStats,
}

impl McResult {
    /// Normalised costs of the feasible samples, in scenario order.
    pub fn feasible_normalized(&self) -> Vec<f64> {
        self.samples
            .iter()
            .filter(|s| s.status == SolveStatus::Optimal)
            .map(|s| s.cost_normalized)
            .collect()
    }
}

/// Samples `n` scenarios from `seed` and solves the OPF for each.
///
/// Scenario `k` depends only on `(seed, k)` and every solve starts from the
/// nominal basis, so results do not depend on the number of workers.
pub fn run_monte_carlo(model: &NetworkModel, n: usize, seed: u64, opts: &McOptions) -> Result<McResult> {
    if n == 0 {
        return Err(Error::Validation("Monte Carlo needs at least one sample".into()));
    }
    let nominal = build_opf_with(model, None, &opts.opf)?;
    let (base, warm) = solve_warm(&nominal, None)?;
    let nominal_cost = base.cost_total;
    if !(nominal_cost > 0.0) {
        return Err(Error::Model(format!(
            "nominal cost {nominal_cost} must be positive to normalise sample costs"
        )));
    }

    let run_one = |k: usize| -> Result<CostSample> {
        let (scenario, redraws) = sample_indexed(model, seed, k as u64)?;
        let mut sample = CostSample {
            scenario_id: k,
            seed: scenario.seed,
            cost: f64::NAN,
            cost_normalized: f64::NAN,
            status: SolveStatus::Optimal,
            redraws,
        };
        if scenario.is_zero() {
            sample.cost = nominal_cost;
            sample.cost_normalized = 1.0;
            return Ok(sample);
        }
        let demand = scenario.demand(model);
        let outcome = build_opf_with(model, Some(&demand), &opts.opf).and_then(|p| solve_warm(&p, warm.as_ref()));
        match outcome {
            Ok((d, _)) => {
                sample.cost = d.cost_total;
                sample.cost_normalized = d.cost_total / nominal_cost;
            }
            Err(Error::Infeasible(_)) => sample.status = SolveStatus::Infeasible,
            Err(e @ Error::Validation(_)) => return Err(e),
            Err(e) => {
                log::warn!("scenario {k}: {e}");
                sample.status = SolveStatus::Failed;
            }
        }
        Ok(sample)
    };

    let samples: Vec<CostSample> = if opts.jobs == 0 {
        (0..n).into_par_iter().map(run_one).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::Validation(format!("cannot start {} workers: {e}", opts.jobs)))?;
        pool.install(|| (0..n).into_par_iter().map(run_one).collect::<Result<_>>())?
    };
    let stats = SampleStats::from_samples(&samples);
    Ok(McResult {
        nominal_cost,
        samples,
        stats,
    })
}

/// `scenario_id,seed,cost,cost_normalized,status` rows.
pub fn write_samples_csv<W: std::io::Write>(samples: &[CostSample], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario_id", "seed", "cost", "cost_normalized", "status"])?;
    for s in samples {
        w.write_record([
            s.scenario_id.to_string(),
            s.seed.to_string(),
            s.cost.to_string(),
            s.cost_normalized.to_string(),
            s.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_samples_csv`]; redraw counts are not stored
/// and come back as zero.
pub fn read_samples_csv<R: std::io::Read>(input: R, origin: &str) -> Result<Vec<CostSample>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| Error::parse(origin, e))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse(origin, format!("missing column '{name}'")))
    };
    let (id, seed, cost, norm, status) = (col("scenario_id")?, col("seed")?, col("cost")?, col("cost_normalized")?, col("status")?);
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(origin, e))?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let bad = |what: &str| Error::parse(origin, format!("row {}: bad {what}", line + 2));
        out.push(CostSample {
            scenario_id: field(id).parse().map_err(|_| bad("scenario_id"))?,
            seed: field(seed).parse().map_err(|_| bad("seed"))?,
            cost: field(cost).parse().map_err(|_| bad("cost"))?,
            cost_normalized: field(norm).parse().map_err(|_| bad("cost_normalized"))?,
            status: field(status).parse().map_err(|_| bad("status"))?,
            redraws: 0,
        });
    }
    Ok(out)
}
