//! Command-line front end; `gridsure --help` lists the subcommands.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{write_lp, StandardForm};
use crate::network::load_network;
use crate::opf::{build_opf_with, solve_warm, Formulation, OpfOptions};
use crate::pipeline::{run_pipeline, summary, PipelineConfig};
use crate::pricing::{fit_inverse_gaussian, price_curve, price_policy, write_curve_csv, Convention};
use crate::scenario::{
    apply_laa, read_samples_csv, run_monte_carlo, worst_case, write_samples_csv, McOptions, SolveStatus, WorstCaseConfig,
};
use crate::smp::{failure_probability_with, load_smp_spec, sweep, SojournReading, Transition, STATES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "gridsure", version, about = "Cyber-insurance pricing for distribution grids")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, env = "GRIDSURE_JOBS", default_value_t = 0)]
    jobs: usize,
    /// Raise log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the nominal day-ahead dispatch.
    Opf(OpfArgs),
    /// Sample load scenarios and solve each dispatch.
    Mc(McArgs),
    /// Search for the load variation with the highest operating cost.
    Worstcase(WorstCaseArgs),
    /// Failure probability of the attack lifecycle model.
    Smp(SmpArgs),
    /// Fit the cost samples and price cover.
    Price(PriceArgs),
    /// Run every stage and write a report.
    Pipeline(PipelineArgs),
    /// Cost of a load-altering attack on chosen buses at one hour.
    Laa(LaaArgs),
}

#[derive(Debug, Args)]
struct OpfArgs {
    network: PathBuf,
    #[arg(long, value_enum, default_value_t = Formulation::Substituted)]
    formulation: Formulation,
    /// Curtailment cost breakpoints per bus and hour.
    #[arg(long, default_value_t = 16)]
    breakpoints: usize,
    /// Also write the model in LP text format to this path.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct McArgs {
    network: PathBuf,
    #[arg(short = 'n', long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Debug, Args)]
struct WorstCaseArgs {
    network: PathBuf,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 10)]
    max_passes: usize,
}

#[derive(Debug, Args)]
struct SmpArgs {
    /// JSON file with an `smp` section.
    spec: PathBuf,
    #[arg(long, value_enum, default_value_t = SojournReading::Survival)]
    reading: SojournReading,
    /// Sweep one transition's scale: TRANSITION LO HI N.
    #[arg(long, num_args = 4, value_names = ["TRANSITION", "LO", "HI", "N"])]
    sweep: Option<Vec<String>>,
}

#[derive(Debug, Args)]
struct PriceArgs {
    /// Sample CSV written by `mc` or `pipeline`.
    samples: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Convention::StandardCte)]
    convention: Convention,
    /// Worst-case cost (same unit as the sample costs) to add to the fit.
    #[arg(long)]
    worst_case: Option<f64>,
    /// Nominal cost; by default recovered from the sample rows.
    #[arg(long)]
    nominal: Option<f64>,
    /// Emit alpha, VaR, TVaR, premium CSV over alpha = 0.01 .. 0.50.
    #[arg(long)]
    curve: bool,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    network: PathBuf,
    /// SMP parameter file; defaults to the network file's `smp` section.
    #[arg(long)]
    smp: Option<PathBuf>,
    #[arg(short = 'n', long, default_value_t = 1000)]
    samples: usize,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = Convention::StandardCte)]
    convention: Convention,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    /// Reuse completed stage files in the output directory.
    #[arg(long)]
    resume: bool,
}

#[derive(Debug, Args)]
struct LaaArgs {
    network: PathBuf,
    /// Comma-separated bus ids.
    #[arg(long, value_delimiter = ',', required = true)]
    buses: Vec<usize>,
    #[arg(long)]
    hour: usize,
    #[arg(long)]
    scale: f64,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let mut stdout = std::io::stdout().lock();
    match execute(&cli, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn out_file(dir: &Path, name: &str) -> Result<(PathBuf, std::io::BufWriter<fs::File>)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, std::io::BufWriter::new(file)))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Validation(format!("csv output failed: {e}"))
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Validation(format!("cannot serialise: {e}")))
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Opf(a) => opf(cli, a, out),
        Command::Mc(a) => mc(cli, a, out),
        Command::Worstcase(a) => worstcase(cli, a, out),
        Command::Smp(a) => smp(cli, a, out),
        Command::Price(a) => price(cli, a, out),
        Command::Pipeline(a) => pipeline(cli, a, out),
        Command::Laa(a) => laa(cli, a, out),
    }
}

fn opf(cli: &Cli, a: &OpfArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_network(&a.network)?;
    let opts = OpfOptions {
        breakpoints: a.breakpoints,
        formulation: a.formulation,
        ..OpfOptions::default()
    };
    let problem = build_opf_with(&model, None, &opts)?;
    if let Some(path) = &a.dump_lp {
        let text = write_lp(&StandardForm::compile(&problem.lp)?);
        fs::write(path, text).map_err(|e| Error::io(path, e))?;
    }
    let (d, _) = solve_warm(&problem, None)?;
    let (_, file) = out_file(&cli.out, "dispatch.csv")?;
    d.write_csv(file).map_err(csv_err)?;
    match cli.format {
        Format::Json => writeln!(out, "{}", json(&d)?).map_err(io_err),
        Format::Csv => d.write_csv(out).map_err(csv_err),
        Format::Text => {
            writeln!(out, "C*={}", d.cost_total).map_err(io_err)?;
            writeln!(
                out,
                "energy {:.6}  curtailment {:.6}  curtailed {:.6} MWh  nodes {}  pivots {}",
                d.cost_energy,
                d.cost_curtail,
                d.total_curtailed_energy(model.policy.time_step),
                d.nodes,
                d.lp_iterations
            )
            .map_err(io_err)
        }
    }
}

fn mc(cli: &Cli, a: &McArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_network(&a.network)?;
    let opts = McOptions {
        jobs: cli.jobs,
        ..McOptions::default()
    };
    let res = run_monte_carlo(&model, a.samples, cli.seed, &opts)?;
    let (_, file) = out_file(&cli.out, "samples.csv")?;
    write_samples_csv(&res.samples, file).map_err(csv_err)?;
    match cli.format {
        Format::Json => writeln!(out, "{}", json(&res)?).map_err(io_err),
        Format::Csv => write_samples_csv(&res.samples, out).map_err(csv_err),
        Format::Text => {
            let s = &res.stats;
            writeln!(out, "nominal cost {}", res.nominal_cost).map_err(io_err)?;
            writeln!(
                out,
                "samples {} feasible {} infeasible {} failed {}",
                s.count, s.feasible, s.infeasible, s.failed
            )
            .map_err(io_err)?;
            writeln!(
                out,
                "normalised mean {:.6} sd {:.6} min {:.6} max {:.6}",
                s.mean, s.stddev, s.min, s.max
            )
            .map_err(io_err)?;
            writeln!(out, "redraws {} acceptance {:.4}", s.total_redraws, s.acceptance_rate).map_err(io_err)
        }
    }
}

fn worstcase(cli: &Cli, a: &WorstCaseArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_network(&a.network)?;
    let cfg = WorstCaseConfig {
        restarts: a.restarts,
        seed: cli.seed,
        max_passes: a.max_passes,
        jobs: cli.jobs,
        ..WorstCaseConfig::default()
    };
    let wc = worst_case(&model, &cfg)?;
    let (_, mut file) = out_file(&cli.out, "worst_case.json")?;
    writeln!(file, "{}", json(&wc)?).map_err(io_err)?;
    match cli.format {
        Format::Json => writeln!(out, "{}", json(&wc)?).map_err(io_err),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["bus", "t", "var_p", "var_q"]).map_err(csv_err)?;
            for (i, id) in wc.scenario.bus_ids.iter().enumerate() {
                for t in 0..wc.scenario.var_p[i].len() {
                    w.write_record([
                        id.to_string(),
                        t.to_string(),
                        wc.scenario.var_p[i][t].to_string(),
                        wc.scenario.var_q[i][t].to_string(),
                    ])
                    .map_err(csv_err)?;
                }
            }
            w.flush().map_err(io_err)
        }
        Format::Text => {
            writeln!(out, "C'={}", wc.cost).map_err(io_err)?;
            writeln!(
                out,
                "nominal {} ratio {:.6} relaxed {} certified {} evaluations {}",
                wc.nominal_cost,
                wc.cost / wc.nominal_cost,
                wc.relaxed_cost,
                wc.certified,
                wc.evaluations
            )
            .map_err(io_err)
        }
    }
}

fn smp(cli: &Cli, a: &SmpArgs, out: &mut dyn Write) -> Result<()> {
    let spec = load_smp_spec(&a.spec)?;
    if let Some(sw) = &a.sweep {
        let transition: Transition = sw[0].parse()?;
        let num = |s: &str, what: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Validation(format!("sweep {what} must be a number, got '{s}'")))
        };
        let lo = num(&sw[1], "lo")?;
        let hi = num(&sw[2], "hi")?;
        let n: usize = sw[3]
            .parse()
            .map_err(|_| Error::Validation(format!("sweep count must be an integer, got '{}'", sw[3])))?;
        let rows = sweep(&spec, transition, lo, hi, n, a.reading)?;
        if cli.format == Format::Json {
            let v: Vec<_> = rows.iter().map(|(x, r)| serde_json::json!({"scale": x, "result": r})).collect();
            return writeln!(out, "{}", json(&v)?).map_err(io_err);
        }
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["scale".to_string()];
        header.extend(STATES.iter().map(|s| format!("p_{s}")));
        header.push("p_fail".into());
        w.write_record(&header).map_err(csv_err)?;
        for (x, r) in rows {
            let mut rec = vec![x.to_string()];
            rec.extend(r.state_probs.iter().map(|p| p.to_string()));
            rec.push(r.p_fail.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        return w.flush().map_err(io_err);
    }
    let r = failure_probability_with(&spec, a.reading)?;
    match cli.format {
        Format::Json => writeln!(out, "{}", json(&r)?).map_err(io_err),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["state", "emc_pi", "sojourn", "probability"]).map_err(csv_err)?;
            for n in 0..5 {
                w.write_record([
                    STATES[n].to_string(),
                    r.emc_pi[n].to_string(),
                    r.sojourn[n].to_string(),
                    r.state_probs[n].to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush().map_err(io_err)
        }
        Format::Text => writeln!(out, "P_F={}", r.p_fail).map_err(io_err),
    }
}

fn price(cli: &Cli, a: &PriceArgs, out: &mut dyn Write) -> Result<()> {
    let file = fs::File::open(&a.samples).map_err(|e| Error::io(&a.samples, e))?;
    let samples = read_samples_csv(file, &a.samples.display().to_string())?;
    let feasible: Vec<_> = samples.iter().filter(|s| s.status == SolveStatus::Optimal).collect();
    let nominal = match a.nominal {
        Some(n) => n,
        None => feasible
            .iter()
            .find(|s| s.cost_normalized > 0.0)
            .map(|s| s.cost / s.cost_normalized)
            .ok_or_else(|| Error::Validation(format!("{} has no feasible samples", a.samples.display())))?,
    };
    let normalized: Vec<f64> = feasible.iter().map(|s| s.cost_normalized).collect();
    let fit = fit_inverse_gaussian(&normalized, a.worst_case.map(|w| w / nominal))?;
    if a.curve {
        let alphas: Vec<f64> = (1..=50).map(|k| k as f64 / 100.0).collect();
        let curve = price_curve(&fit, &alphas, nominal, a.convention)?;
        return write_curve_csv(&curve, out).map_err(csv_err);
    }
    let report = price_policy(&fit, a.alpha, nominal, a.convention)?;
    match cli.format {
        Format::Json => {
            writeln!(out, "{}", json(&serde_json::json!({"fit": fit, "risk": report}))?).map_err(io_err)
        }
        Format::Csv => write_curve_csv(&[report], out).map_err(csv_err),
        Format::Text => {
            writeln!(out, "fit mu {} lambda {} ({} samples)", fit.mu, fit.lambda, fit.samples).map_err(io_err)?;
            writeln!(out, "{}", report.summary()).map_err(io_err)
        }
    }
}

fn pipeline(cli: &Cli, a: &PipelineArgs, out: &mut dyn Write) -> Result<()> {
    let config = PipelineConfig {
        network_path: a.network.clone(),
        smp_spec_path: a.smp.clone(),
        mc_samples: a.samples,
        master_seed: cli.seed,
        alpha_override: a.alpha,
        convention: a.convention,
        worker_count: cli.jobs,
        output_dir: cli.out.clone(),
        worst_case_restarts: a.restarts,
        resume: a.resume,
    };
    let report = run_pipeline(&config)?;
    match cli.format {
        Format::Json => writeln!(out, "{}", json(&report)?).map_err(io_err),
        Format::Csv => {
            let path = cli.out.join("samples.csv");
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            out.write_all(text.as_bytes()).map_err(io_err)
        }
        Format::Text => out.write_all(summary(&report).as_bytes()).map_err(io_err),
    }
}

#[derive(Serialize)]
struct LaaOutcome {
    nominal_cost: f64,
    attacked_cost: f64,
    increase: f64,
    buses: Vec<usize>,
    hour: usize,
    scale: f64,
}

fn laa(cli: &Cli, a: &LaaArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_network(&a.network)?;
    let scenario = apply_laa(&model, &a.buses, a.hour, a.scale)?;
    let opts = OpfOptions::default();
    let (nominal, warm) = solve_warm(&build_opf_with(&model, None, &opts)?, None)?;
    let attacked = build_opf_with(&model, Some(&scenario.demand(&model)), &opts)?;
    let (hit, _) = solve_warm(&attacked, warm.as_ref())?;
    let res = LaaOutcome {
        nominal_cost: nominal.cost_total,
        attacked_cost: hit.cost_total,
        increase: hit.cost_total / nominal.cost_total - 1.0,
        buses: a.buses.clone(),
        hour: a.hour,
        scale: a.scale,
    };
    match cli.format {
        Format::Json => writeln!(out, "{}", json(&res)?).map_err(io_err),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["nominal_cost", "attacked_cost", "increase"]).map_err(csv_err)?;
            w.write_record([res.nominal_cost.to_string(), res.attacked_cost.to_string(), res.increase.to_string()])
                .map_err(csv_err)?;
            w.flush().map_err(io_err)
        }
        Format::Text => writeln!(
            out,
            "nominal {}  attacked {}  increase {:+.4}%",
            res.nominal_cost,
            res.attacked_cost,
            100.0 * res.increase
        )
        .map_err(io_err),
    }
}
