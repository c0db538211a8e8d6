//! Scenario files, experiment orchestration and reports.
//!
//! A scenario file is JSON:
//!
//! ```json
//! {
//!   "nodes": ["a", "b"],
//!   "links": [{"id": "ab", "src": "a", "dst": "b", "capacity_bps": 1e6, "latency_s": 0.001}],
//!   "flows": [
//!     {"id": "bulk", "class": "LDA", "path": ["ab"], "size_bits": 12000},
//!     {"id": "probe", "class": "AoI", "src": "a", "dst": "b", "size_bits": 4000}
//!   ],
//!   "objective": "lac",
//!   "lambda": 0.125,
//!   "scheduler": "sdm",
//!   "sim": {"duration_s": 10.0}
//! }
//! ```
//!
//! Flows give either a `path` of link ids or `src`/`dst`, routed over a minimum-hop path.
//! A `traffic` block instead of `flows` draws flows at random per seed.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_form::SingleLinkParams;
use crate::model::{
    shortest_path_routes, validate_network, FlowClass, FlowId, FlowSpec, Link, LinkId, Network,
    NodeId,
};
use crate::opt::{solve, Objective, Solution, SolveError, SolverConfig};
use crate::sim::{self, FlowReport, Scenario, SchedulerKind, SimConfig, SimError, SimReport};

/// Default `lambda` for comparisons.
pub const DEFAULT_LAMBDA: f64 = 0.125;

/// Packet size assumed for LDA flows by the min-AoI objective when nothing else is known.
const DEFAULT_S_LDA_BITS: f64 = 12_000.0;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{origin}: invalid scenario:\n{}", .problems.join("\n"))]
    Validation { origin: String, problems: Vec<String> },
    #[error("unknown scheduler `{0}`")]
    UnknownScheduler(String),
    #[error("unknown objective `{0}`")]
    UnknownObjective(String),
    #[error("objective required: `lambda` is set but no `objective` is named")]
    ObjectiveRequired,
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("report output failed: {0}")]
    Output(String),
}

impl HarnessError {
    /// Process exit code: 2 for bad input, 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Parse { .. }
            | HarnessError::Validation { .. }
            | HarnessError::UnknownScheduler(_)
            | HarnessError::UnknownObjective(_)
            | HarnessError::ObjectiveRequired
            | HarnessError::InvalidSweep(_)
            | HarnessError::Unsupported(_)
            | HarnessError::Sim(SimError::Invalid(_))
            | HarnessError::Solve(SolveError::Invalid(_) | SolveError::Model(_)) => 2,
            _ => 3,
        }
    }
}

/// Random traffic: each ordered node pair independently hosts an LDA flow and an AoI
/// flow, each with probability `pair_probability`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    #[serde(default = "default_pair_probability")]
    pub pair_probability: f64,
    pub lda_size_bits: f64,
    pub aoi_size_bits: f64,
}

fn default_pair_probability() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowEntry {
    id: FlowId,
    class: FlowClass,
    #[serde(default)]
    path: Option<Vec<LinkId>>,
    #[serde(default)]
    src: Option<NodeId>,
    #[serde(default)]
    dst: Option<NodeId>,
    size_bits: f64,
    #[serde(default)]
    rate_bps: Option<f64>,
    #[serde(default)]
    freq_hz: Option<f64>,
    #[serde(default)]
    phase_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(default)]
    description: Option<String>,
    nodes: Vec<NodeId>,
    links: Vec<Link>,
    #[serde(default)]
    flows: Vec<FlowEntry>,
    #[serde(default)]
    traffic: Option<TrafficSpec>,
    #[serde(default)]
    objective: Option<String>,
    #[serde(default)]
    lambda: Option<f64>,
    #[serde(default)]
    s_lda_bits: Option<f64>,
    #[serde(default)]
    scheduler: Option<String>,
    #[serde(default)]
    sim: SimConfig,
    #[serde(default)]
    gamma: BTreeMap<LinkId, f64>,
}

/// A parsed and validated scenario file.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub origin: String,
    pub description: Option<String>,
    pub network: Network,
    pub flows: Vec<FlowSpec>,
    pub traffic: Option<TrafficSpec>,
    pub objective: Option<Objective>,
    pub lambda: Option<f64>,
    pub s_lda_bits: f64,
    pub scheduler: Option<SchedulerKind>,
    pub sim: SimConfig,
    pub gamma: BTreeMap<LinkId, f64>,
}

impl LoadedScenario {
    /// Flows for one run: the listed flows, or a random draw from `seed` when the file
    /// has a `traffic` block and no flows.
    pub fn flows_for_seed(&self, seed: u64) -> Vec<FlowSpec> {
        match (&self.traffic, self.flows.is_empty()) {
            (Some(t), true) => random_flows(&self.network, t, seed),
            _ => self.flows.clone(),
        }
    }
}

pub fn load_scenario(path: &Path) -> Result<LoadedScenario, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_scenario(&text, &path.display().to_string())
}

/// Parses scenario JSON; `origin` names the source in error messages.
pub fn parse_scenario(text: &str, origin: &str) -> Result<LoadedScenario, HarnessError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| HarnessError::Parse {
        origin: origin.to_owned(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let network = Network::new(file.nodes.iter().cloned(), file.links.clone());

    let mut problems = Vec::new();
    let mut flows = Vec::with_capacity(file.flows.len());
    for e in &file.flows {
        let path = match (&e.path, &e.src, &e.dst) {
            (Some(p), None, None) => p.clone(),
            (None, Some(s), Some(d)) => {
                match shortest_path_routes(&network, &[(s.clone(), d.clone())]) {
                    Ok(mut routes) => routes.remove(0),
                    Err(err) => {
                        problems.push(located(text, e.id.as_str(), &format!("flow {}: {err}", e.id)));
                        continue;
                    }
                }
            }
            _ => {
                problems.push(located(
                    text,
                    e.id.as_str(),
                    &format!("flow {} needs either `path` or both `src` and `dst`", e.id),
                ));
                continue;
            }
        };
        flows.push(FlowSpec {
            id: e.id.clone(),
            class: e.class,
            path,
            size_bits: e.size_bits,
            rate_bps: e.rate_bps,
            freq_hz: e.freq_hz,
            phase_s: e.phase_s,
        });
    }
    for v in validate_network(&network, &flows) {
        problems.push(located(text, v.subject(), &v.to_string()));
    }
    if let Some(t) = &file.traffic {
        if !(0.0..=1.0).contains(&t.pair_probability) {
            problems.push(format!("traffic pair_probability {} outside [0, 1]", t.pair_probability));
        }
        if !(t.lda_size_bits > 0.0 && t.aoi_size_bits > 0.0) {
            problems.push("traffic packet sizes must be positive".to_owned());
        }
    }
    if !problems.is_empty() {
        return Err(HarnessError::Validation {
            origin: origin.to_owned(),
            problems,
        });
    }

    let s_lda_bits = file.s_lda_bits.unwrap_or_else(|| mean_lda_size(&flows, file.traffic.as_ref()));
    let objective = match (&file.objective, file.lambda) {
        (None, Some(_)) => return Err(HarnessError::ObjectiveRequired),
        (None, None) => None,
        (Some(name), lambda) => Some(parse_objective(
            name,
            lambda.unwrap_or(DEFAULT_LAMBDA),
            s_lda_bits,
        )?),
    };
    let scheduler = file.scheduler.as_deref().map(parse_scheduler).transpose()?;
    Ok(LoadedScenario {
        origin: origin.to_owned(),
        description: file.description,
        network,
        flows,
        traffic: file.traffic,
        objective,
        lambda: file.lambda,
        s_lda_bits,
        scheduler,
        sim: file.sim,
        gamma: file.gamma,
    })
}

/// Prefixes `message` with the first line of `text` that quotes `subject`.
fn located(text: &str, subject: &str, message: &str) -> String {
    let needle = format!("\"{subject}\"");
    match text.lines().position(|l| l.contains(&needle)) {
        Some(i) => format!("line {}: {message}", i + 1),
        None => message.to_owned(),
    }
}

fn mean_lda_size(flows: &[FlowSpec], traffic: Option<&TrafficSpec>) -> f64 {
    let sizes: Vec<f64> = flows
        .iter()
        .filter(|f| f.class == FlowClass::Lda)
        .map(|f| f.size_bits)
        .collect();
    if sizes.is_empty() {
        traffic.map_or(DEFAULT_S_LDA_BITS, |t| t.lda_size_bits)
    } else {
        sizes.iter().sum::<f64>() / sizes.len() as f64
    }
}

pub fn parse_scheduler(name: &str) -> Result<SchedulerKind, HarnessError> {
    SchedulerKind::parse(name).ok_or_else(|| HarnessError::UnknownScheduler(name.to_owned()))
}

pub fn parse_objective(name: &str, lambda: f64, s_lda_bits: f64) -> Result<Objective, HarnessError> {
    Objective::parse(name, lambda, s_lda_bits)
        .ok_or_else(|| HarnessError::UnknownObjective(name.to_owned()))
}

/// Draws flows over every ordered pair of distinct nodes that has a route.
///
/// Pairs are visited in node order and each draws LDA then AoI, so the result depends
/// only on the network and `seed`.
pub fn random_flows(net: &Network, traffic: &TrafficSpec, seed: u64) -> Vec<FlowSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flows = Vec::new();
    for src in net.nodes() {
        for dst in net.nodes() {
            if src == dst {
                continue;
            }
            let lda = rng.random_bool(traffic.pair_probability);
            let aoi = rng.random_bool(traffic.pair_probability);
            if !(lda || aoi) {
                continue;
            }
            let Ok(mut routes) = shortest_path_routes(net, &[(src.clone(), dst.clone())]) else {
                continue;
            };
            let path = routes.remove(0);
            if lda {
                flows.push(FlowSpec {
                    id: format!("lda:{src}:{dst}").into(),
                    class: FlowClass::Lda,
                    path: path.clone(),
                    size_bits: traffic.lda_size_bits,
                    rate_bps: None,
                    freq_hz: None,
                    phase_s: 0.0,
                });
            }
            if aoi {
                flows.push(FlowSpec {
                    id: format!("aoi:{src}:{dst}").into(),
                    class: FlowClass::Aoi,
                    path,
                    size_bits: traffic.aoi_size_bits,
                    rate_bps: None,
                    freq_hz: None,
                    phase_s: 0.0,
                });
            }
        }
    }
    flows
}

/// Solves `objective` and copies the allocation into `flows`.
pub fn allocate(
    net: &Network,
    flows: &mut [FlowSpec],
    objective: Objective,
) -> Result<Solution, HarnessError> {
    let solution = solve(net, flows, objective, &SolverConfig::default())?;
    solution.allocation.apply_to(flows);
    Ok(solution)
}

/// Builds the simulation for one run, solving first when an objective is given.
pub fn build_run(
    sc: &LoadedScenario,
    objective: Option<Objective>,
    scheduler: SchedulerKind,
    seed: u64,
    sim_cfg: &SimConfig,
) -> Result<(Option<Solution>, Scenario), HarnessError> {
    let mut flows = sc.flows_for_seed(seed);
    let solution = match objective {
        Some(obj) => Some(allocate(&sc.network, &mut flows, obj)?),
        None => None,
    };
    let cfg = SimConfig {
        seed,
        ..sim_cfg.clone()
    };
    let mut scenario = Scenario::new(sc.network.clone(), flows, scheduler, cfg);
    if let Some(s) = &solution {
        scenario.gamma = s.allocation.gamma.clone();
    }
    scenario.gamma.extend(sc.gamma.iter().map(|(k, v)| (k.clone(), *v)));
    Ok((solution, scenario))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed { reason: String },
}

/// One `(objective, lambda, scheduler, seed)` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub objective: String,
    pub lambda: f64,
    pub scheduler: String,
    pub seed: u64,
    pub total_lda_throughput_bps: Option<f64>,
    pub total_aoi_s: Option<f64>,
    pub status: RowStatus,
    pub flows: Vec<FlowReport>,
}

impl CurveRow {
    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }

    fn key(&self) -> (&str, f64, &str, u64) {
        (&self.objective, self.lambda, &self.scheduler, self.seed)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub rows: Vec<CurveRow>,
}

/// One job of a sweep or comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Job {
    pub objective: Objective,
    pub scheduler: SchedulerKind,
    pub seed: u64,
    /// Reported `lambda`; for LAC it equals the objective's own.
    pub lambda: f64,
}

pub fn run_job(sc: &LoadedScenario, job: &Job, sim_cfg: &SimConfig) -> CurveRow {
    let mut row = CurveRow {
        objective: job.objective.name().to_owned(),
        lambda: job.lambda,
        scheduler: job.scheduler.to_string(),
        seed: job.seed,
        total_lda_throughput_bps: None,
        total_aoi_s: None,
        status: RowStatus::Ok,
        flows: Vec::new(),
    };
    let result = build_run(sc, Some(job.objective), job.scheduler, job.seed, sim_cfg)
        .and_then(|(_, scenario)| sim::run(&scenario).map_err(HarnessError::from));
    match result {
        Ok(report) => {
            row.total_lda_throughput_bps = Some(report.total_lda_throughput_bps());
            row.total_aoi_s = report.total_aoi_s();
            row.flows = report.flows;
        }
        Err(e) => {
            log::warn!("{} {} seed {}: {e}", row.objective, row.scheduler, row.seed);
            row.status = RowStatus::Failed {
                reason: e.to_string(),
            };
        }
    }
    row
}

/// Runs `jobs` in parallel and sorts the rows by `(objective, lambda, scheduler, seed)`.
pub fn run_jobs(sc: &LoadedScenario, jobs: &[Job], sim_cfg: &SimConfig) -> TradeoffCurve {
    let mut rows: Vec<CurveRow> = jobs.par_iter().map(|j| run_job(sc, j, sim_cfg)).collect();
    rows.sort_by(|a, b| {
        let (ka, kb) = (a.key(), b.key());
        ka.0.cmp(kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then(ka.2.cmp(kb.2))
            .then(ka.3.cmp(&kb.3))
    });
    TradeoffCurve { rows }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub lambdas: Vec<f64>,
    pub schedulers: Vec<SchedulerKind>,
    /// Objective names accepted by [`Objective::parse`].
    pub objectives: Vec<String>,
    pub seeds: Vec<u64>,
    /// Overrides the scenario's random-traffic pair probability.
    pub pair_probability: Option<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidSweep(m.to_owned()));
        if self.lambdas.is_empty() {
            return bad("empty lambda list");
        }
        if self.lambdas.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return bad("lambda values must be finite and non-negative");
        }
        if self.schedulers.is_empty() || self.objectives.is_empty() || self.seeds.is_empty() {
            return bad("schedulers, objectives and seeds must be non-empty");
        }
        if let Some(p) = self.pair_probability {
            if !(0.0..=1.0).contains(&p) {
                return bad("pair probability outside [0, 1]");
            }
        }
        Ok(())
    }
}

/// Solves and simulates every `(objective, lambda, scheduler, seed)` combination.
pub fn run_sweep(
    sc: &LoadedScenario,
    spec: &SweepSpec,
    sim_cfg: &SimConfig,
) -> Result<TradeoffCurve, HarnessError> {
    spec.validate()?;
    let mut sc = sc.clone();
    if let Some(p) = spec.pair_probability {
        match &mut sc.traffic {
            Some(t) => t.pair_probability = p,
            None => {
                return Err(HarnessError::InvalidSweep(
                    "pair probability given but the scenario has no traffic block".to_owned(),
                ))
            }
        }
    }
    let mut jobs = Vec::new();
    for name in &spec.objectives {
        for &lambda in &spec.lambdas {
            let objective = parse_objective(name, lambda, sc.s_lda_bits)?;
            for &scheduler in &spec.schedulers {
                for &seed in &spec.seeds {
                    jobs.push(Job {
                        objective,
                        scheduler,
                        seed,
                        lambda,
                    });
                }
            }
        }
    }
    Ok(run_jobs(&sc, &jobs, sim_cfg))
}

/// Every objective under every scheduler, on the same traffic and seeds.
pub fn run_compare(
    sc: &LoadedScenario,
    objectives: &[Objective],
    schedulers: &[SchedulerKind],
    seeds: &[u64],
    sim_cfg: &SimConfig,
) -> TradeoffCurve {
    let pairs: Vec<(Objective, SchedulerKind)> = objectives
        .iter()
        .flat_map(|&o| schedulers.iter().map(move |&s| (o, s)))
        .collect();
    run_pairs(sc, &pairs, seeds, sim_cfg)
}

/// Each `(objective, scheduler)` pair on the same traffic and seeds.
pub fn run_pairs(
    sc: &LoadedScenario,
    pairs: &[(Objective, SchedulerKind)],
    seeds: &[u64],
    sim_cfg: &SimConfig,
) -> TradeoffCurve {
    let jobs: Vec<Job> = pairs
        .iter()
        .flat_map(|&(objective, scheduler)| {
            seeds.iter().map(move |&seed| Job {
                objective,
                scheduler,
                seed,
                lambda: objective.lambda(),
            })
        })
        .collect();
    run_jobs(sc, &jobs, sim_cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

/// CSV header of a trade-off curve.
pub const CURVE_HEADER: [&str; 7] = [
    "objective",
    "lambda",
    "scheduler",
    "seed",
    "total_lda_throughput_bps",
    "total_aoi_s",
    "status",
];

impl TradeoffCurve {
    /// Failed rows carry their reason in the status cell as `failed: REASON`.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<(), HarnessError> {
        let err = |e: csv::Error| HarnessError::Output(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CURVE_HEADER).map_err(err)?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for r in &self.rows {
            let status = match &r.status {
                RowStatus::Ok => "ok".to_owned(),
                RowStatus::Failed { reason } => format!("failed: {reason}"),
            };
            w.write_record([
                r.objective.clone(),
                r.lambda.to_string(),
                r.scheduler.clone(),
                r.seed.to_string(),
                opt(r.total_lda_throughput_bps),
                opt(r.total_aoi_s),
                status,
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| HarnessError::Output(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("curve serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Parse {
            origin: "curve".to_owned(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

/// Writes `curve` to `path`, or to standard output when `path` is `None`.
pub fn emit_report(
    curve: &TradeoffCurve,
    format: ReportFormat,
    path: Option<&Path>,
) -> Result<(), HarnessError> {
    let mut buf = Vec::new();
    match format {
        ReportFormat::Csv => curve.write_csv(&mut buf)?,
        ReportFormat::Json => {
            buf = curve.to_json().into_bytes();
            buf.push(b'\n');
        }
    }
    write_output(&buf, path)
}

pub fn write_output(bytes: &[u8], path: Option<&Path>) -> Result<(), HarnessError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| HarnessError::Io {
            path: p.to_owned(),
            source,
        }),
        None => {
            use io::Write;
            io::stdout()
                .write_all(bytes)
                .map_err(|e| HarnessError::Output(e.to_string()))
        }
    }
}

/// Per-flow CSV or JSON of one simulation.
pub fn render_sim_report(report: &SimReport, format: ReportFormat) -> Result<Vec<u8>, HarnessError> {
    match format {
        ReportFormat::Csv => {
            let mut buf = Vec::new();
            report
                .write_csv(&mut buf)
                .map_err(|e| HarnessError::Output(e.to_string()))?;
            Ok(buf)
        }
        ReportFormat::Json => {
            let mut buf = serde_json::to_vec_pretty(report).expect("report serializes");
            buf.push(b'\n');
            Ok(buf)
        }
    }
}

/// Closed-form parameters of a one-link scenario with one periodic AoI flow.
///
/// The TDM frame is the scheduler's if set, else the simulator's default of 20 of the
/// largest transmission times on the link.
pub fn single_link_params(sc: &LoadedScenario, lambda: f64) -> Result<SingleLinkParams, HarnessError> {
    let unsupported = |m: &str| HarnessError::Unsupported(format!("analyze: {m}"));
    let [link] = sc.network.links() else {
        return Err(unsupported("scenario must have exactly one link"));
    };
    let aoi: Vec<&FlowSpec> = sc.flows.iter().filter(|f| f.class == FlowClass::Aoi).collect();
    let [flow] = aoi.as_slice() else {
        return Err(unsupported("scenario must have exactly one AoI flow"));
    };
    let mu = flow
        .freq_hz
        .filter(|m| *m > 0.0)
        .ok_or_else(|| unsupported("the AoI flow needs a positive freq_hz"))?;
    let max_bits = sc.flows.iter().map(|f| f.size_bits).fold(0.0, f64::max);
    let t_f = match sc.scheduler {
        Some(SchedulerKind::Tdm { frame_s: Some(t) }) => t,
        _ => 20.0 * max_bits / link.capacity_bps,
    };
    Ok(SingleLinkParams {
        capacity_bps: link.capacity_bps,
        t_i: 1.0 / mu,
        t_o: 0.0,
        t_f,
        d_t: flow.size_bits / link.capacity_bps,
        d_p: link.latency_s,
        gamma: 1.0,
        lambda,
    })
}
