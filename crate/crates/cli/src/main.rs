use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fatesim::closed_form::{gamma_table, optimal_gamma_sdm, optimal_gamma_tdm};
use fatesim::harness::{
    self, build_run, emit_report, load_scenario, parse_objective, parse_scheduler,
    render_sim_report, run_compare, run_sweep, single_link_params, write_output, HarnessError,
    LoadedScenario, ReportFormat, SweepSpec, DEFAULT_LAMBDA,
};
use fatesim::model::FlowClass;
use fatesim::opt::{AllocationReport, Objective};
use fatesim::sim::{self, SimConfig};

#[derive(Parser)]
#[command(name = "fatesim", version, about = "Rate allocation and AoI-aware scheduling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the allocation problem and print per-flow rates and frequencies.
    Solve(SolveArgs),
    /// Simulate one scenario and print per-flow results.
    Simulate(SimulateArgs),
    /// Sweep lambda, schedulers, objectives and seeds into a trade-off curve.
    Sweep(SweepArgs),
    /// Compare objectives and schedulers on identical traffic.
    Compare(SweepArgs),
    /// Single-link closed-form throughput and AoI over a gamma grid.
    Analyze(AnalyzeArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "csv|json", default_value = "csv")]
    format: ReportFormat,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_name = "NAME")]
    objective: Option<String>,
    #[arg(long, value_name = "LIST")]
    lambda: Option<String>,
    /// Seed for scenarios with random traffic.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_name = "NAME")]
    objective: Option<String>,
    #[arg(long, value_name = "LIST")]
    lambda: Option<String>,
    #[arg(long, value_name = "NAME")]
    scheduler: Option<String>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "S")]
    duration: Option<f64>,
    #[arg(long, value_name = "S")]
    warmup: Option<f64>,
    /// Write one line per processed event to this file.
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated objective names.
    #[arg(long, value_name = "LIST")]
    objective: Option<String>,
    /// Comma-separated lambda values.
    #[arg(long, value_name = "LIST")]
    lambda: Option<String>,
    /// Comma-separated scheduler names.
    #[arg(long, value_name = "LIST")]
    scheduler: Option<String>,
    /// First seed; repetitions use consecutive seeds.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, value_name = "K", default_value_t = 1)]
    reps: u64,
    /// Per-pair flow probability for random traffic.
    #[arg(long, value_name = "P")]
    pair_prob: Option<f64>,
    #[arg(long, value_name = "S")]
    duration: Option<f64>,
    #[arg(long, value_name = "S")]
    warmup: Option<f64>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_name = "LIST")]
    lambda: Option<String>,
    /// Number of gamma grid points in (0, 1].
    #[arg(long, value_name = "N", default_value_t = 20)]
    points: usize,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Self {
            code: e.exit_code() as u8,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Simulate(a) => simulate(a),
        Command::Sweep(a) => sweep(a, false),
        Command::Compare(a) => sweep(a, true),
        Command::Analyze(a) => analyze(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn split_list(text: &str) -> Vec<&str> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn parse_lambdas(text: &str) -> Result<Vec<f64>, Failure> {
    let values = split_list(text)
        .into_iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Failure::usage(format!("--lambda: `{s}` is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(Failure::usage("--lambda: empty list"));
    }
    Ok(values)
}

fn single_lambda(text: Option<&str>) -> Result<Option<f64>, Failure> {
    match text {
        None => Ok(None),
        Some(t) => match parse_lambdas(t)?.as_slice() {
            [l] => Ok(Some(*l)),
            _ => Err(Failure::usage("--lambda takes a single value for this subcommand")),
        },
    }
}

/// Objective from the flag or the file, with the lambda from the flag, the file, or the
/// default. A lambda with no objective anywhere is rejected.
fn resolve_objective(
    sc: &LoadedScenario,
    name: Option<&str>,
    lambda: Option<f64>,
) -> Result<Option<Objective>, Failure> {
    let lambda_value = lambda.or(sc.lambda).unwrap_or(DEFAULT_LAMBDA);
    match name {
        Some(n) => Ok(Some(parse_objective(n, lambda_value, sc.s_lda_bits)?)),
        None => match sc.objective {
            Some(Objective::Lac { .. }) => Ok(Some(Objective::Lac { lambda: lambda_value })),
            Some(o) => Ok(Some(o)),
            None if lambda.is_some() => Err(HarnessError::ObjectiveRequired.into()),
            None => Ok(None),
        },
    }
}

fn sim_config(sc: &LoadedScenario, duration: Option<f64>, warmup: Option<f64>) -> SimConfig {
    let mut cfg = sc.sim.clone();
    if let Some(d) = duration {
        cfg.duration_s = d;
        if warmup.is_none() && cfg.warmup_s.is_some_and(|w| w >= d) {
            cfg.warmup_s = None;
        }
    }
    if let Some(w) = warmup {
        cfg.warmup_s = Some(w);
    }
    cfg
}

/// Loads the scenario; an unreadable file is bad input, not a runtime failure.
fn load(path: &Path) -> Result<LoadedScenario, Failure> {
    load_scenario(path).map_err(|e| {
        let code = match e {
            HarnessError::Io { .. } => 2,
            _ => e.exit_code() as u8,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    })
}

fn solve(a: SolveArgs) -> Result<(), Failure> {
    let sc = load(&a.common.scenario)?;
    let lambda = single_lambda(a.lambda.as_deref())?;
    let objective = resolve_objective(&sc, a.objective.as_deref(), lambda)?
        .ok_or_else(|| Failure::usage("solve needs --objective or an objective in the scenario"))?;
    let seed = a.seed.unwrap_or(sc.sim.seed);
    let mut flows = sc.flows_for_seed(seed);
    let solution = harness::allocate(&sc.network, &mut flows, objective)?;
    for w in &solution.diagnostics.warnings {
        log::warn!("{w}");
    }
    let report = AllocationReport::new(&solution, &flows);
    let bytes = match a.common.format {
        ReportFormat::Json => {
            let mut b = serde_json::to_vec_pretty(&report).expect("report serializes");
            b.push(b'\n');
            b
        }
        ReportFormat::Csv => {
            let mut s = String::from("flow,class,value\n");
            for f in &report.flows {
                s.push_str(&format!("{},{},{}\n", f.flow, f.class, f.value));
            }
            s.into_bytes()
        }
    };
    write_output(&bytes, a.common.out.as_deref()).map_err(Failure::from)
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let sc = load(&a.common.scenario)?;
    let lambda = single_lambda(a.lambda.as_deref())?;
    let objective = resolve_objective(&sc, a.objective.as_deref(), lambda)?;
    let scheduler = match a.scheduler.as_deref() {
        Some(name) => parse_scheduler(name)?,
        None => sc.scheduler.unwrap_or(sim::SchedulerKind::Sdm),
    };
    let mut cfg = sim_config(&sc, a.duration, a.warmup);
    cfg.trace = a.trace.is_some();
    let seed = a.seed.unwrap_or(cfg.seed);
    let (solution, scenario) = build_run(&sc, objective, scheduler, seed, &cfg)?;
    if let Some(s) = &solution {
        for w in &s.diagnostics.warnings {
            log::warn!("{w}");
        }
    }
    let run = sim::run_detailed(&scenario).map_err(HarnessError::from)?;
    if let (Some(path), Some(trace)) = (&a.trace, &run.trace) {
        write_trace(path, trace)?;
    }
    let bytes = render_sim_report(&run.report, a.common.format)?;
    write_output(&bytes, a.common.out.as_deref()).map_err(Failure::from)
}

fn write_trace(path: &Path, trace: &[sim::TraceRecord]) -> Result<(), Failure> {
    let mut text = String::new();
    for r in trace {
        text.push_str(&r.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|source| {
        HarnessError::Io {
            path: path.to_owned(),
            source,
        }
        .into()
    })
}

fn sweep(a: SweepArgs, compare: bool) -> Result<(), Failure> {
    let sc = load(&a.common.scenario)?;
    let cfg = sim_config(&sc, a.duration, a.warmup);
    let first = a.seed.unwrap_or(cfg.seed);
    if a.reps == 0 {
        return Err(Failure::usage("--reps must be at least 1"));
    }
    let seeds: Vec<u64> = (first..first + a.reps).collect();
    let schedulers = match a.scheduler.as_deref() {
        Some(list) => split_list(list)
            .into_iter()
            .map(parse_scheduler)
            .collect::<Result<Vec<_>, _>>()?,
        None if compare => vec![sim::SchedulerKind::Sdm, sim::SchedulerKind::Fifo],
        None => vec![sc.scheduler.unwrap_or(sim::SchedulerKind::Sdm)],
    };
    let objectives: Vec<String> = match a.objective.as_deref() {
        Some(list) => split_list(list).into_iter().map(str::to_owned).collect(),
        None if compare => vec!["lac".to_owned(), "max_throughput".to_owned()],
        None => vec![sc.objective.map_or("lac", |o| o.name()).to_owned()],
    };
    let curve = if compare {
        let lambda = single_lambda(a.lambda.as_deref())?
            .or(sc.lambda)
            .unwrap_or(DEFAULT_LAMBDA);
        let objectives = objectives
            .iter()
            .map(|n| parse_objective(n, lambda, sc.s_lda_bits))
            .collect::<Result<Vec<_>, _>>()?;
        let mut sc = sc;
        if let Some(p) = a.pair_prob {
            let spec = SweepSpec {
                lambdas: vec![lambda],
                schedulers: schedulers.clone(),
                objectives: vec!["lac".to_owned()],
                seeds: seeds.clone(),
                pair_probability: Some(p),
            };
            spec.validate()?;
            match &mut sc.traffic {
                Some(t) => t.pair_probability = p,
                None => {
                    return Err(HarnessError::InvalidSweep(
                        "--pair-prob given but the scenario has no traffic block".to_owned(),
                    )
                    .into())
                }
            }
        }
        run_compare(&sc, &objectives, &schedulers, &seeds, &cfg)
    } else {
        let lambdas = match a.lambda.as_deref() {
            Some(t) => parse_lambdas(t)?,
            None => vec![sc.lambda.unwrap_or(DEFAULT_LAMBDA)],
        };
        let spec = SweepSpec {
            lambdas,
            schedulers,
            objectives,
            seeds,
            pair_probability: a.pair_prob,
        };
        run_sweep(&sc, &spec, &cfg)?
    };
    for row in curve.rows.iter().filter(|r| !r.is_ok()) {
        log::warn!(
            "{} lambda={} {} seed={} failed",
            row.objective,
            row.lambda,
            row.scheduler,
            row.seed
        );
    }
    emit_report(&curve, a.common.format, a.common.out.as_deref()).map_err(Failure::from)
}

fn analyze(a: AnalyzeArgs) -> Result<(), Failure> {
    let sc = load(&a.common.scenario)?;
    if a.points == 0 {
        return Err(Failure::usage("--points must be at least 1"));
    }
    let lambda = single_lambda(a.lambda.as_deref())?
        .or(sc.lambda)
        .unwrap_or(DEFAULT_LAMBDA);
    let mut sc = sc;
    let unset = sc.flows.iter().any(|f| f.class == FlowClass::Aoi && f.freq_hz.is_none());
    if unset {
        let objective = match sc.objective {
            Some(Objective::Lac { .. }) | None => Objective::Lac { lambda },
            Some(o) => o,
        };
        harness::allocate(&sc.network, &mut sc.flows, objective)?;
    }
    let params = single_link_params(&sc, lambda)?;
    let invalid = |e: fatesim::closed_form::ClosedFormError| Failure {
        code: 2,
        message: e.to_string(),
    };
    let rows = gamma_table(&params, a.points).map_err(invalid)?;
    match optimal_gamma_tdm(lambda, params.d_t, params.t_f, params.t_i) {
        Ok(g) => log::info!("optimal gamma: sdm {} tdm {g}", optimal_gamma_sdm(lambda)),
        Err(e) => log::info!("optimal gamma: sdm {} tdm n/a ({e})", optimal_gamma_sdm(lambda)),
    }
    let bytes = match a.common.format {
        ReportFormat::Json => {
            let mut b = serde_json::to_vec_pretty(&rows).expect("rows serialize");
            b.push(b'\n');
            b
        }
        ReportFormat::Csv => {
            let mut s = String::from(
                "gamma,tdm_throughput,tdm_aoi,sdm_throughput,sdm_aoi,tdm_objective,sdm_objective\n",
            );
            for r in &rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.gamma,
                    r.tdm_throughput,
                    r.tdm_aoi,
                    r.sdm_throughput,
                    r.sdm_aoi,
                    r.tdm_objective,
                    r.sdm_objective
                ));
            }
            s.into_bytes()
        }
    };
    write_output(&bytes, a.common.out.as_deref()).map_err(Failure::from)
}
