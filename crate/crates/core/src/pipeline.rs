//! End-to-end quote: nominal dispatch, Monte Carlo, worst case, failure
//! probability, inverse-Gaussian fit and premium.
//!
//! Every stage writes its result under `<output_dir>/stages/`; with `resume`
//! set, a stage whose file exists and was produced from the same inputs is
//! loaded instead of recomputed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{load_network, NetworkModel};
use crate::opf::{build_opf_with, solve_warm, OpfOptions};
use crate::pricing::{fit_inverse_gaussian, price_policy, Convention, FittedDistribution, RiskReport};
use crate::scenario::{
    read_samples_csv, run_monte_carlo, worst_case, write_samples_csv, CostSample, McOptions, SampleStats, SolveStatus,
    WorstCaseConfig, WorstCaseResult,
};
use crate::smp::{failure_probability, load_smp_spec, parse_smp_spec, SmpResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub network_path: PathBuf,
    /// SMP parameter file; when absent the `smp` section of the network file is used.
    pub smp_spec_path: Option<PathBuf>,
    pub mc_samples: usize,
    pub master_seed: u64,
    pub alpha_override: Option<f64>,
    pub convention: Convention,
    /// Monte Carlo workers; 0 uses every available core.
    pub worker_count: usize,
    pub output_dir: PathBuf,
    pub worst_case_restarts: usize,
    pub resume: bool,
}

impl PipelineConfig {
    pub fn new(network_path: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            network_path: network_path.into(),
            smp_spec_path: None,
            mc_samples: 1000,
            master_seed: 0,
            alpha_override: None,
            convention: Convention::default(),
            worker_count: 0,
            output_dir: output_dir.into(),
            worst_case_restarts: WorstCaseConfig::default().restarts,
            resume: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mc_samples == 0 {
            return Err(Error::Validation("mc_samples must be at least 1".into()));
        }
        if let Some(a) = self.alpha_override {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::Validation(format!("alpha override must lie in (0, 1), got {a}")));
            }
        }
        if self.worst_case_restarts == 0 {
            return Err(Error::Validation("worst-case search needs at least one restart".into()));
        }
        Ok(())
    }

    fn worst_case_seed(&self) -> u64 {
        self.master_seed.wrapping_add(1)
    }

    /// Inputs that determine stage results, stored with each stage file.
    fn fingerprint(&self) -> Inputs {
        Inputs {
            network: self.network_path.display().to_string(),
            smp_spec: self.smp_spec_path.as_ref().map(|p| p.display().to_string()),
            mc_samples: self.mc_samples,
            master_seed: self.master_seed,
            alpha_override: self.alpha_override,
            convention: self.convention,
            worst_case_restarts: self.worst_case_restarts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inputs {
    pub network: String,
    pub smp_spec: Option<String>,
    pub mc_samples: usize,
    pub master_seed: u64,
    pub alpha_override: Option<f64>,
    pub convention: Convention,
    pub worst_case_restarts: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Seeds {
    pub master: u64,
    pub monte_carlo: u64,
    pub worst_case: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorstCaseSummary {
    pub cost: f64,
    pub cost_normalized: f64,
    pub relaxed_cost: f64,
    pub certified: bool,
    pub restart_costs: Vec<f64>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub gridsure_version: String,
    pub status: String,
    pub failed_stage: Option<String>,
    pub error: Option<String>,
    pub inputs: Inputs,
    pub seeds: Seeds,
    /// Per stage: "computed", "resumed", "skipped: <reason>" or "failed".
    pub stages: BTreeMap<String, String>,
    pub nominal_cost: Option<f64>,
    pub sample_stats: Option<SampleStats>,
    pub worst_case: Option<WorstCaseSummary>,
    pub fit_mc_only: Option<FittedDistribution>,
    pub fit: Option<FittedDistribution>,
    pub smp: Option<SmpResult>,
    pub alpha: Option<f64>,
    pub alpha_source: Option<String>,
    pub risk: Option<RiskReport>,
    pub warnings: Vec<String>,
    /// Wall-clock seconds per stage; excluded from reproducibility checks.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct StageFile<T> {
    schema_version: u32,
    inputs: Inputs,
    result: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NominalStage {
    cost_total: f64,
    cost_energy: f64,
    cost_curtail: f64,
    curtailed_energy: f64,
}

struct Runner<'a> {
    config: &'a PipelineConfig,
    stage_dir: PathBuf,
    report: PipelineReport,
}

impl Runner<'_> {
    fn stage_path(&self, name: &str) -> PathBuf {
        self.stage_dir.join(format!("{name}.json"))
    }

    fn load_stage<T: DeserializeOwned>(&self, name: &str) -> Option<T> {
        if !self.config.resume {
            return None;
        }
        let text = fs::read_to_string(self.stage_path(name)).ok()?;
        let file: StageFile<T> = serde_json::from_str(&text).ok()?;
        (file.schema_version == SCHEMA_VERSION && file.inputs == self.report.inputs).then_some(file.result)
    }

    fn save_stage<T: Serialize>(&self, name: &str, result: &T) -> Result<()> {
        let file = StageFile {
            schema_version: SCHEMA_VERSION,
            inputs: self.report.inputs.clone(),
            result,
        };
        write_json(&self.stage_path(name), &file)
    }

    /// Runs or resumes one stage and records its status and timing.
    fn stage<T, F>(&mut self, name: &str, compute: F) -> Result<T>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce(&mut Self) -> Result<T>,
    {
        if let Some(done) = self.load_stage::<T>(name) {
            self.report.stages.insert(name.into(), "resumed".into());
            return Ok(done);
        }
        let started = Instant::now();
        match compute(self) {
            Ok(value) => {
                self.report.timings.insert(name.into(), started.elapsed().as_secs_f64());
                self.save_stage(name, &value)?;
                self.report.stages.insert(name.into(), "computed".into());
                Ok(value)
            }
            Err(e) => {
                self.report.stages.insert(name.into(), "failed".into());
                self.report.status = "failed".into();
                self.report.failed_stage = Some(name.into());
                self.report.error = Some(e.to_string());
                Err(e)
            }
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Validation(format!("cannot serialise: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Validation(format!("cannot write {}: {other:?}", path.display())),
    }
}

fn load_smp(config: &PipelineConfig) -> Result<Option<crate::smp::SmpSpec>> {
    if let Some(p) = &config.smp_spec_path {
        return load_smp_spec(p).map(Some);
    }
    let text = fs::read_to_string(&config.network_path).map_err(|e| Error::io(&config.network_path, e))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::parse(&config.network_path, e))?;
    if doc.get("smp").is_none() {
        return Ok(None);
    }
    parse_smp_spec(&text, &config.network_path.display().to_string()).map(Some)
}

/// Runs every stage in order. The report is written to `report.json` even
/// when a stage fails, with the failing stage named.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    config.validate()?;
    let stage_dir = config.output_dir.join("stages");
    fs::create_dir_all(&stage_dir).map_err(|e| Error::io(&stage_dir, e))?;
    let report = PipelineReport {
        schema_version: SCHEMA_VERSION,
        gridsure_version: env!("CARGO_PKG_VERSION").into(),
        status: "running".into(),
        failed_stage: None,
        error: None,
        inputs: config.fingerprint(),
        seeds: Seeds {
            master: config.master_seed,
            monte_carlo: config.master_seed,
            worst_case: config.worst_case_seed(),
        },
        stages: BTreeMap::new(),
        nominal_cost: None,
        sample_stats: None,
        worst_case: None,
        fit_mc_only: None,
        fit: None,
        smp: None,
        alpha: None,
        alpha_source: None,
        risk: None,
        warnings: Vec::new(),
        timings: BTreeMap::new(),
    };
    let mut runner = Runner {
        config,
        stage_dir,
        report,
    };
    let outcome = run_stages(&mut runner);
    let report_path = config.output_dir.join("report.json");
    if outcome.is_ok() {
        runner.report.status = "complete".into();
    } else if runner.report.failed_stage.is_none() {
        runner.report.status = "failed".into();
        runner.report.error = outcome.as_ref().err().map(|e| e.to_string());
    }
    write_json(&report_path, &runner.report)?;
    let summary_path = config.output_dir.join("summary.txt");
    fs::write(&summary_path, summary(&runner.report)).map_err(|e| Error::io(&summary_path, e))?;
    outcome.map(|_| runner.report)
}

fn run_stages(r: &mut Runner<'_>) -> Result<()> {
    let config = r.config;
    let model: NetworkModel = load_network(&config.network_path)?;
    let spec = load_smp(config)?;
    if spec.is_none() && config.alpha_override.is_none() {
        let e = Error::Validation(format!(
            "no SMP parameters: {} has no smp section and neither an SMP file nor an alpha override was given",
            config.network_path.display()
        ));
        r.report.stages.insert("smp".into(), "failed".into());
        r.report.failed_stage = Some("smp".into());
        r.report.status = "failed".into();
        r.report.error = Some(e.to_string());
        return Err(e);
    }
    let opf = OpfOptions::default();
    let out = &config.output_dir;

    let nominal: NominalStage = r.stage("nominal", |_| {
        let problem = build_opf_with(&model, None, &opf)?;
        let (d, _) = solve_warm(&problem, None)?;
        let path = out.join("dispatch.csv");
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        d.write_csv(std::io::BufWriter::new(file)).map_err(|e| csv_error(&path, e))?;
        Ok(NominalStage {
            cost_total: d.cost_total,
            cost_energy: d.cost_energy,
            cost_curtail: d.cost_curtail,
            curtailed_energy: d.total_curtailed_energy(model.policy.time_step),
        })
    })?;
    r.report.nominal_cost = Some(nominal.cost_total);

    let samples_path = out.join("samples.csv");
    let stats: SampleStats = r.stage("monte_carlo", |_| {
        let opts = McOptions {
            jobs: config.worker_count,
            opf,
        };
        let mc = run_monte_carlo(&model, config.mc_samples, config.master_seed, &opts)?;
        let file = fs::File::create(&samples_path).map_err(|e| Error::io(&samples_path, e))?;
        write_samples_csv(&mc.samples, std::io::BufWriter::new(file)).map_err(|e| csv_error(&samples_path, e))?;
        Ok(mc.stats)
    })?;
    if stats.infeasible + stats.failed > 0 {
        r.report.warnings.push(format!(
            "{} infeasible and {} failed Monte Carlo scenarios excluded from the fit",
            stats.infeasible, stats.failed
        ));
    }
    r.report.sample_stats = Some(stats);
    let file = fs::File::open(&samples_path).map_err(|e| Error::io(&samples_path, e))?;
    let samples: Vec<CostSample> = read_samples_csv(file, &samples_path.display().to_string())?;
    let normalized: Vec<f64> = samples
        .iter()
        .filter(|s| s.status == SolveStatus::Optimal)
        .map(|s| s.cost_normalized)
        .collect();

    let wc: WorstCaseResult = r.stage("worst_case", |_| {
        let cfg = WorstCaseConfig {
            restarts: config.worst_case_restarts,
            seed: config.worst_case_seed(),
            opf,
            ..WorstCaseConfig::default()
        };
        worst_case(&model, &cfg)
    })?;
    let wc_normalized = wc.cost / nominal.cost_total;
    if !wc.certified {
        r.report.warnings.push("worst-case restarts disagree by more than 0.1%".into());
    }
    if let Some(max) = normalized.iter().cloned().reduce(f64::max) {
        if wc_normalized < max * (1.0 - 1e-6) {
            r.report.warnings.push(format!(
                "worst case {wc_normalized:.6} is below the largest sampled cost {max:.6}"
            ));
        }
    }
    r.report.worst_case = Some(WorstCaseSummary {
        cost: wc.cost,
        cost_normalized: wc_normalized,
        relaxed_cost: wc.relaxed_cost,
        certified: wc.certified,
        restart_costs: wc.restart_costs.clone(),
        evaluations: wc.evaluations,
    });

    let smp: Option<SmpResult> = match &spec {
        Some(spec) => Some(r.stage("smp", |_| failure_probability(spec))?),
        None => {
            r.report
                .stages
                .insert("smp".into(), "skipped: no SMP parameters; alpha given explicitly".into());
            None
        }
    };
    r.report.smp = smp.clone();

    let (fit_mc, fit): (FittedDistribution, FittedDistribution) = r.stage("fit", |_| {
        Ok((
            fit_inverse_gaussian(&normalized, None)?,
            fit_inverse_gaussian(&normalized, Some(wc_normalized))?,
        ))
    })?;
    if fit.degenerate {
        r.report
            .warnings
            .push(format!("degenerate fit: samples have no spread, shape capped at {:e}", fit.lambda));
    }
    r.report.fit_mc_only = Some(fit_mc);
    r.report.fit = Some(fit);

    let (alpha, source) = match (config.alpha_override, &smp) {
        (Some(a), _) => (a, "override"),
        (None, Some(s)) => (s.p_fail, "smp_p_fail"),
        (None, None) => unreachable!("checked when loading SMP parameters"),
    };
    r.report.alpha = Some(alpha);
    r.report.alpha_source = Some(source.into());
    let risk: RiskReport = r.stage("price", |_| price_policy(&fit, alpha, nominal.cost_total, config.convention))?;
    r.report.risk = Some(risk);
    Ok(())
}

/// Human-readable summary block.
pub fn summary(report: &PipelineReport) -> String {
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k:<18}{v}\n"));
    line("status", report.status.clone());
    if let Some(stage) = &report.failed_stage {
        line("failed stage", format!("{stage}: {}", report.error.clone().unwrap_or_default()));
    }
    line("network", report.inputs.network.clone());
    line("seed", report.seeds.master.to_string());
    if let Some(c) = report.nominal_cost {
        line("nominal cost", format!("{c:.4}"));
    }
    if let Some(st) = &report.sample_stats {
        line(
            "samples",
            format!("{} ({} feasible), mean {:.5}, sd {:.5}, max {:.5}", st.count, st.feasible, st.mean, st.stddev, st.max),
        );
    }
    if let Some(w) = &report.worst_case {
        line("worst case", format!("{:.4} ({:.5} of nominal, certified {})", w.cost, w.cost_normalized, w.certified));
    }
    if let Some(smp) = &report.smp {
        line("P_F", format!("{:.6}", smp.p_fail));
    }
    if let Some(f) = &report.fit {
        line("fit", format!("inverse Gaussian mu {:.6}, lambda {:.6}", f.mu, f.lambda));
    }
    if let Some(risk) = &report.risk {
        s.push_str(&risk.summary());
        s.push('\n');
    }
    for w in &report.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}
