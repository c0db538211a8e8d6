//! Sending-rate and update-frequency allocation.
//!
//! All four objectives share one solver: a logarithmic-barrier Newton method on the
//! original concave program. Every objective is separable, so gradients and Hessians of
//! the objective are diagonal; only the capacity barrier couples flows.
//!
//! | objective | LDA term | AoI term |
//! |-----------|----------|----------|
//! | [`Objective::Lac`] | `r_f` | `-lambda / (2 mu_f)` |
//! | [`Objective::MaxThroughput`] | `r_f` | `mu_f s_f` |
//! | [`Objective::MinAoi`] | `-s_lda / (2 r_f)` | `-1 / (2 mu_f)` |
//! | [`Objective::Lou2020`] | fixed at 0 | `-1 / (2 mu_f)` |

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    propagation_delay, validate_network, FlowClass, FlowId, FlowSpec, LinkId, LinkLoad,
    ModelError, Network, RateAllocation,
};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("infeasible network: link `{0}` has non-positive capacity")]
    Infeasible(LinkId),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("no convergence after {} Newton iterations (KKT residual {:.3e})", .0.iterations, .0.kkt_residual)]
    NoConvergence(Box<SolverDiagnostics>),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("flow `{0}` has zero update frequency; the AoI bound is undefined")]
    ZeroFrequency(FlowId),
    #[error("flow `{0}` is not an AoI flow")]
    NotAoi(FlowId),
    #[error("negative traffic ({0}, {1})")]
    NegativeTraffic(f64, f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which rate-allocation objective to solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Objective {
    /// Maximize `sum r_f - lambda * sum 1/(2 mu_f)`.
    Lac { lambda: f64 },
    /// Maximize `sum r_f + sum mu_f s_f`, regularized for a unique split.
    MaxThroughput,
    /// Minimize `sum s_lda/(2 r_f) + sum 1/(2 mu_f)`.
    MinAoi { s_lda_bits: f64 },
    /// LDA flows get nothing; minimize `sum 1/(2 mu_f)` over AoI flows.
    Lou2020,
}

impl Objective {
    pub fn lambda(&self) -> f64 {
        match *self {
            Objective::Lac { lambda } => lambda,
            _ => 0.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::Lac { .. } => "lac",
            Objective::MaxThroughput => "max_throughput",
            Objective::MinAoi { .. } => "min_aoi",
            Objective::Lou2020 => "lou2020",
        }
    }

    /// Parses `lac`, `max_throughput`, `min_aoi` or `lou2020` (dashes and case ignored).
    pub fn parse(name: &str, lambda: f64, s_lda_bits: f64) -> Option<Self> {
        let key = name.to_ascii_lowercase().replace('-', "_");
        Some(match key.as_str() {
            "lac" | "fate" => Objective::Lac { lambda },
            "max_throughput" | "maxthroughput" | "mcf" => Objective::MaxThroughput,
            "min_aoi" | "minaoi" => Objective::MinAoi { s_lda_bits },
            "lou2020" | "lou_2020" | "lou" => Objective::Lou2020,
            _ => return None,
        })
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub kkt_tol: f64,
    /// Total Newton iterations across all barrier stages.
    pub max_iters: usize,
    pub initial_t: f64,
    pub t_growth: f64,
    pub newton_tol: f64,
    pub tie_break_epsilon: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kkt_tol: 1e-6,
            max_iters: 5000,
            initial_t: 1.0,
            t_growth: 10.0,
            newton_tol: 1e-9,
            tie_break_epsilon: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub kkt_residual: f64,
    /// Barrier estimate of the dual price of each link's capacity constraint.
    pub dual_prices: BTreeMap<LinkId, f64>,
    /// `c_l - load_l` per link.
    pub slack: BTreeMap<LinkId, f64>,
    /// Epigraph values `h_f = 1/mu_f` of AoI flows with `mu_f > 0`.
    pub epigraph: BTreeMap<FlowId, f64>,
    pub barrier_t: f64,
    pub warnings: Vec<String>,
}

/// An allocation together with how the solver got there.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub objective: Objective,
    pub allocation: RateAllocation,
    pub diagnostics: SolverDiagnostics,
}

pub fn solve_lac(
    net: &Network,
    flows: &[FlowSpec],
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<Solution, SolveError> {
    solve(net, flows, Objective::Lac { lambda }, cfg)
}

pub fn solve_max_throughput(
    net: &Network,
    flows: &[FlowSpec],
    cfg: &SolverConfig,
) -> Result<Solution, SolveError> {
    solve(net, flows, Objective::MaxThroughput, cfg)
}

pub fn solve_min_aoi(
    net: &Network,
    flows: &[FlowSpec],
    cfg: &SolverConfig,
    s_lda_bits: f64,
) -> Result<Solution, SolveError> {
    solve(net, flows, Objective::MinAoi { s_lda_bits }, cfg)
}

/// With routes fixed, the alternating route/throughput iteration of this scheme reaches its
/// fixed point after one pass: minimize AoI subject to capacity, then stop.
pub fn solve_lou2020(
    net: &Network,
    flows: &[FlowSpec],
    cfg: &SolverConfig,
) -> Result<Solution, SolveError> {
    solve(net, flows, Objective::Lou2020, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Term {
    /// `w x`
    Linear(f64),
    /// `-k / x`
    NegInverse(f64),
}

impl Term {
    fn value(self, x: f64) -> f64 {
        match self {
            Term::Linear(w) => w * x,
            Term::NegInverse(k) => -k / x,
        }
    }

    fn grad(self, x: f64) -> f64 {
        match self {
            Term::Linear(w) => w,
            Term::NegInverse(k) => k / (x * x),
        }
    }

    fn hess(self, x: f64) -> f64 {
        match self {
            Term::Linear(_) => 0.0,
            Term::NegInverse(k) => -2.0 * k / (x * x * x),
        }
    }
}

/// Objective term for one flow; `None` means the flow is pinned to zero.
fn term_for(objective: &Objective, flow: &FlowSpec) -> Result<Option<Term>, SolveError> {
    Ok(match (objective, flow.class) {
        (Objective::Lac { .. }, FlowClass::Lda) => Some(Term::Linear(1.0)),
        // with lambda = 0 the objective ignores mu; zero leaves the most room for LDA
        (Objective::Lac { lambda }, FlowClass::Aoi) if *lambda == 0.0 => None,
        (Objective::Lac { lambda }, FlowClass::Aoi) => Some(Term::NegInverse(lambda / 2.0)),
        (Objective::MaxThroughput, FlowClass::Lda) => Some(Term::Linear(1.0)),
        (Objective::MaxThroughput, FlowClass::Aoi) => Some(Term::Linear(flow.size_bits)),
        (Objective::MinAoi { s_lda_bits }, FlowClass::Lda) => {
            if !(*s_lda_bits > 0.0) {
                return Err(SolveError::Invalid(format!(
                    "s_lda must be positive, got {s_lda_bits}"
                )));
            }
            Some(Term::NegInverse(s_lda_bits / 2.0))
        }
        (Objective::MinAoi { .. }, FlowClass::Aoi) => Some(Term::NegInverse(0.5)),
        (Objective::Lou2020, FlowClass::Lda) => None,
        (Objective::Lou2020, FlowClass::Aoi) => Some(Term::NegInverse(0.5)),
    })
}

/// Capacity consumed per unit of the flow's decision variable.
fn coefficient(flow: &FlowSpec) -> f64 {
    match flow.class {
        FlowClass::Lda => 1.0,
        FlowClass::Aoi => flow.size_bits,
    }
}

/// Value of `objective` at `values` in its natural sense (maximized for LAC and Max
/// Throughput, minimized for Min AoI and Lou 2020).
pub fn objective_value(
    objective: &Objective,
    flows: &[FlowSpec],
    values: &BTreeMap<FlowId, f64>,
) -> f64 {
    let v = |f: &FlowSpec| values.get(&f.id).copied().unwrap_or(0.0);
    let inv = |x: f64| if x > 0.0 { 1.0 / (2.0 * x) } else { f64::INFINITY };
    flows
        .iter()
        .map(|f| match (objective, f.class) {
            (Objective::Lac { .. }, FlowClass::Lda) => v(f),
            (Objective::Lac { lambda }, FlowClass::Aoi) => {
                if *lambda == 0.0 {
                    0.0
                } else {
                    -lambda * inv(v(f))
                }
            }
            (Objective::MaxThroughput, FlowClass::Lda) => v(f),
            (Objective::MaxThroughput, FlowClass::Aoi) => v(f) * f.size_bits,
            (Objective::MinAoi { s_lda_bits }, FlowClass::Lda) => s_lda_bits * inv(v(f)),
            (Objective::MinAoi { .. }, FlowClass::Aoi) => inv(v(f)),
            (Objective::Lou2020, FlowClass::Lda) => 0.0,
            (Objective::Lou2020, FlowClass::Aoi) => inv(v(f)),
        })
        .sum()
}

/// Newton steps per barrier stage; late stages stall on rounding before this.
const CENTERING_STEPS: usize = 60;

/// Linear constraint `entries . y <= rhs` in scaled variables.
struct Row {
    entries: Vec<(usize, f64)>,
    rhs: f64,
    link: Option<usize>,
}

/// Separable concave program in scaled variables `y = x / scale`.
struct Problem {
    /// flow index of each free variable
    flow_of: Vec<usize>,
    terms: Vec<Term>,
    /// largest value the variable can take on its own
    scale: Vec<f64>,
    rows: Vec<Row>,
}

impl Problem {
    fn build(net: &Network, flows: &[FlowSpec], objective: &Objective) -> Result<Self, SolveError> {
        let mut flow_of = Vec::new();
        let mut terms = Vec::new();
        let mut scale = Vec::new();
        let mut per_link: Vec<Vec<(usize, f64)>> = vec![Vec::new(); net.links().len()];
        for (fi, f) in flows.iter().enumerate() {
            let Some(term) = term_for(objective, f)? else {
                continue;
            };
            let a = coefficient(f);
            let var = flow_of.len();
            let mut u = f64::INFINITY;
            for id in &f.path {
                let li = net
                    .link_index(id)
                    .ok_or_else(|| ModelError::UnknownLink(id.clone()))?;
                u = u.min(net.links()[li].capacity_bps / a);
                per_link[li].push((var, a));
            }
            flow_of.push(fi);
            terms.push(term);
            scale.push(u);
        }
        let rows = per_link
            .into_iter()
            .enumerate()
            .filter(|(_, e)| !e.is_empty())
            .map(|(li, entries)| {
                let c = net.links()[li].capacity_bps;
                Row {
                    entries: entries
                        .into_iter()
                        .map(|(v, a)| (v, a * scale[v] / c))
                        .collect(),
                    rhs: 1.0,
                    link: Some(li),
                }
            })
            .collect();
        Ok(Self {
            flow_of,
            terms,
            scale,
            rows,
        })
    }

    /// Point of least Euclidean norm (in `x`) on the optimal face of a linear objective.
    ///
    /// The face is read off the central-path point `y` at parameter `t`: links and bounds
    /// whose scaled slack is below `1/sqrt(t)` are taken as active. The projection onto that
    /// face is a least-distance program, solved exactly. Returns `None` when the face
    /// cannot be identified.
    fn min_norm_on_face(&self, y: &DVector<f64>, t: f64, tol: f64) -> Option<DVector<f64>> {
        let cut = 1.0 / t.sqrt();
        let slacks = self.slacks(y);
        let free: Vec<usize> = (0..self.n()).filter(|&i| y[i] >= cut).collect();
        let nf = free.len();
        if nf == 0 {
            return Some(DVector::zeros(self.n()));
        }
        // work in x / c_ref so every quantity is O(1); rows become `a . x <= 1`
        let u = |i: usize| self.scale[i];
        let mut active = Vec::new();
        let mut inactive = Vec::new();
        for (row, &s) in self.rows.iter().zip(&slacks) {
            let coeffs: Vec<f64> = free
                .iter()
                .map(|&i| {
                    row.entries
                        .iter()
                        .find(|&&(v, _)| v == i)
                        .map_or(0.0, |&(_, b)| b / u(i))
                })
                .collect();
            if s < cut {
                active.push((coeffs, row.rhs));
            } else {
                inactive.push((coeffs, row.rhs));
            }
        }
        let x1 = DVector::from_fn(nf, |k, _| u(free[k]) * y[free[k]]);

        // project onto the affine hull of the active rows
        let (x0, basis) = if active.is_empty() {
            (x1, DMatrix::identity(nf, nf))
        } else {
            let a = DMatrix::from_fn(active.len(), nf, |r, c| active[r].0[c]);
            let rhs = DVector::from_fn(active.len(), |r, _| active[r].1);
            let pinv = a.clone().pseudo_inverse(1e-12).ok()?;
            let x0 = &x1 - &pinv * (&a * &x1 - rhs);
            // the null space is found in the scaled variables, where every coefficient is
            // O(1), then mapped back and orthonormalized
            let scaled = DMatrix::from_fn(a.nrows(), nf, |r, c| a[(r, c)] * u(free[c]));
            let pinv_s = scaled.clone().pseudo_inverse(1e-12).ok()?;
            let eig = (DMatrix::identity(nf, nf) - &pinv_s * &scaled).symmetric_eigen();
            let keep: Vec<usize> = (0..nf).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
            let basis = if keep.is_empty() {
                DMatrix::zeros(nf, 0)
            } else {
                let mapped =
                    DMatrix::from_fn(nf, keep.len(), |r, c| u(free[r]) * eig.eigenvectors[(r, keep[c])]);
                mapped.qr().q()
            };
            (x0, basis)
        };

        let x = if basis.ncols() == 0 {
            x0
        } else {
            // minimize |x0 + N z| subject to x >= 0 and the inactive rows:
            // with u = z - z*, z* = -N'x0, that is  G u >= h
            let z_star = -(basis.transpose() * &x0);
            let centre = &x0 + &basis * &z_star;
            let nr = nf + inactive.len();
            let mut g = DMatrix::zeros(nr, basis.ncols());
            let mut h = DVector::zeros(nr);
            for k in 0..nf {
                g.set_row(k, &basis.row(k));
                h[k] = -centre[k];
            }
            for (j, (coeffs, rhs)) in inactive.iter().enumerate() {
                let a = DVector::from_column_slice(coeffs);
                g.set_row(nf + j, &(-(a.transpose() * &basis)));
                h[nf + j] = a.dot(&centre) - rhs;
            }
            let du = ldp(&g, &h)?;
            centre + basis * du
        };

        let mut out = DVector::zeros(self.n());
        for (k, &i) in free.iter().enumerate() {
            let v = x[k] / u(i);
            // LDP leaves rounding noise on variables the face pins to zero
            out[i] = if v > 1e-6 { v } else { 0.0 };
        }
        let worst = self.slacks(&out).into_iter().fold(f64::INFINITY, f64::min);
        (worst >= -tol).then_some(out)
    }
    fn n(&self) -> usize {
        self.terms.len()
    }

    fn m(&self) -> f64 {
        (self.rows.len() + self.n()) as f64
    }

    fn slacks(&self, y: &DVector<f64>) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.rhs - r.entries.iter().map(|&(v, b)| b * y[v]).sum::<f64>())
            .collect()
    }

    fn strictly_feasible(&self, y: &DVector<f64>) -> bool {
        y.iter().all(|&v| v > 0.0) && self.slacks(y).iter().all(|&s| s > 0.0)
    }

    fn f(&self, y: &DVector<f64>) -> f64 {
        (0..self.n())
            .map(|i| self.terms[i].value(self.scale[i] * y[i]))
            .sum()
    }

    fn barrier(&self, t: f64, y: &DVector<f64>) -> f64 {
        let mut v = -t * self.f(y);
        for s in self.slacks(y) {
            v -= s.ln();
        }
        for &yi in y.iter() {
            v -= yi.ln();
        }
        v
    }

    /// Every link at most half full.
    fn start(&self) -> DVector<f64> {
        let mut y: DVector<f64> = DVector::from_element(self.n(), 0.5);
        for row in &self.rows {
            let load: f64 = row.entries.iter().map(|&(_, b)| b).sum();
            for &(v, _) in &row.entries {
                y[v] = y[v].min(0.5 * row.rhs / load);
            }
        }
        y
    }

    /// Newton step and decrement for `t * (-f) - sum log(slack) - sum log(y)`.
    fn newton_step(&self, t: f64, y: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
        let n = self.n();
        let mut g = DVector::zeros(n);
        let mut h = DMatrix::zeros(n, n);
        for i in 0..n {
            let u = self.scale[i];
            let x = u * y[i];
            g[i] = -t * self.terms[i].grad(x) * u - 1.0 / y[i];
            h[(i, i)] = -t * self.terms[i].hess(x) * u * u + 1.0 / (y[i] * y[i]);
        }
        for (row, s) in self.rows.iter().zip(self.slacks(y)) {
            let inv = 1.0 / s;
            for &(a, ba) in &row.entries {
                g[a] += ba * inv;
                for &(b, bb) in &row.entries {
                    h[(a, b)] += ba * bb * inv * inv;
                }
            }
        }
        // symmetric diagonal scaling keeps Cholesky usable when slacks get tiny
        let d: DVector<f64> = h.diagonal().map(|v| 1.0 / v.sqrt());
        let hs = DMatrix::from_fn(n, n, |a, b| h[(a, b)] * d[a] * d[b]);
        let gs = g.component_mul(&d);
        // rounding can leave the scaled matrix a hair short of positive definite
        let chol = [0.0, 1e-14, 1e-12, 1e-10, 1e-8].into_iter().find_map(|ridge| {
            (hs.clone() + DMatrix::identity(n, n) * ridge).cholesky()
        })?;
        let step = -chol.solve(&gs);
        let decrement = -gs.dot(&step);
        Some((step.component_mul(&d), decrement))
    }

    /// Follows the central path from `y` until `done(y, t)` holds after a centering pass.
    /// Returns `Err` with the last iterate when the iteration budget runs out.
    fn follow_path(
        &self,
        mut y: DVector<f64>,
        cfg: &SolverConfig,
        iters: &mut usize,
        warnings: &mut Vec<String>,
        mut done: impl FnMut(&DVector<f64>, f64) -> bool,
    ) -> Result<(DVector<f64>, f64), (DVector<f64>, f64)> {
        let mut t = cfg.initial_t;
        if self.n() == 0 {
            return Ok((y, t));
        }
        debug_assert!(self.strictly_feasible(&y));
        loop {
            for _ in 0..CENTERING_STEPS {
                if *iters >= cfg.max_iters {
                    return Err((y, t));
                }
                *iters += 1;
                let Some((step, decrement)) = self.newton_step(t, &y) else {
                    warnings.push(format!("singular Newton system at t = {t:e}"));
                    break;
                };
                if decrement / 2.0 <= cfg.newton_tol {
                    break;
                }
                let f0 = self.barrier(t, &y);
                let mut alpha = 1.0;
                let mut moved = false;
                while alpha > 1e-20 {
                    let cand = &y + &step * alpha;
                    if self.strictly_feasible(&cand)
                        && self.barrier(t, &cand) <= f0 - 0.25 * alpha * decrement
                    {
                        y = cand;
                        moved = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                if !moved {
                    // centered as well as floating point allows
                    break;
                }
            }
            if done(&y, t) || t > 1e18 {
                return Ok((y, t));
            }
            t *= cfg.t_growth;
        }
    }
}

/// Solves `objective` over the given flows. All capacity constraints hold at the returned
/// point; flows with a strictly concave term get strictly positive values.
///
/// Max Throughput has a face of optimal allocations rather than a single point. The
/// regularizer `-tie_break_epsilon * sum x^2` selects one; the solver returns the limit of
/// that selection as the weight goes to zero, which is the optimum of least Euclidean norm.
pub fn solve(
    net: &Network,
    flows: &[FlowSpec],
    objective: Objective,
    cfg: &SolverConfig,
) -> Result<Solution, SolveError> {
    if !(objective.lambda() >= 0.0) {
        return Err(SolveError::Invalid(format!(
            "lambda must be non-negative, got {}",
            objective.lambda()
        )));
    }
    if !(cfg.kkt_tol > 0.0) {
        return Err(SolveError::Invalid("kkt_tol must be positive".into()));
    }
    if let Some(l) = net.links().iter().find(|l| !(l.capacity_bps > 0.0)) {
        return Err(SolveError::Infeasible(l.id.clone()));
    }
    if let Some(v) = validate_network(net, flows).first() {
        return Err(SolveError::Invalid(v.to_string()));
    }

    let p = Problem::build(net, flows, &objective)?;
    let mut iters = 0;
    let mut warnings = Vec::new();

    // `y` gives the values, `(y_dual, t)` the barrier dual estimates
    let finish = |y: &DVector<f64>, y_dual: &DVector<f64>, t: f64, iters: usize, warnings| {
        let mut values: BTreeMap<FlowId, f64> =
            flows.iter().map(|f| (f.id.clone(), 0.0)).collect();
        for i in 0..p.n() {
            values.insert(flows[p.flow_of[i]].id.clone(), p.scale[i] * y[i]);
        }
        let allocation = allocation_from_values(net, flows, values, &objective)?;
        let mut dual_prices = BTreeMap::new();
        for (row, s) in p.rows.iter().zip(p.slacks(y_dual)) {
            if let Some(li) = row.link {
                let link = &net.links()[li];
                dual_prices.insert(link.id.clone(), 1.0 / (t * s * link.capacity_bps));
            }
        }
        let slack = net
            .links()
            .iter()
            .map(|l| {
                let load = allocation.loads.get(&l.id).copied().unwrap_or_default();
                (l.id.clone(), l.capacity_bps - load.total())
            })
            .collect();
        let epigraph = flows
            .iter()
            .filter(|f| f.class == FlowClass::Aoi)
            .filter_map(|f| {
                let mu = allocation.values[&f.id];
                (mu > 0.0).then(|| (f.id.clone(), 1.0 / mu))
            })
            .collect();
        let kkt = kkt_residual(&allocation, net, flows, &objective);
        Ok::<_, SolveError>((
            allocation,
            SolverDiagnostics {
                iterations: iters,
                kkt_residual: kkt,
                dual_prices,
                slack,
                epigraph,
                barrier_t: t,
                warnings,
            },
        ))
    };

    let gap_target = 1e-3 * cfg.kkt_tol;
    let stage = p.follow_path(p.start(), cfg, &mut iters, &mut warnings, |y, t| {
        p.m() / t <= gap_target * p.f(y).abs().max(1.0)
            && finish(y, y, t, 0, Vec::new())
                .map(|(_, d)| d.kkt_residual <= cfg.kkt_tol)
                .unwrap_or(false)
    });
    let (y_path, t) = match stage {
        Ok(done) => done,
        Err((y, t)) => {
            let (_, diag) = finish(&y, &y, t, iters, warnings)?;
            return Err(SolveError::NoConvergence(Box::new(diag)));
        }
    };
    let mut y = y_path.clone();
    if objective == Objective::MaxThroughput {
        match p.min_norm_on_face(&y_path, t, cfg.tie_break_epsilon) {
            Some(polished) => y = polished,
            None => warnings.push("optimal face not identified; split is not minimum-norm".into()),
        }
    }
    let (allocation, diagnostics) = finish(&y, &y_path, t, iters, warnings)?;
    if diagnostics.kkt_residual > cfg.kkt_tol {
        return Err(SolveError::NoConvergence(Box::new(diagnostics)));
    }
    Ok(Solution {
        objective,
        allocation,
        diagnostics,
    })
}

/// Least-distance program: the shortest `u` with `g u >= h`, through NNLS.
/// `None` when the constraints are inconsistent.
fn ldp(g: &DMatrix<f64>, h: &DVector<f64>) -> Option<DVector<f64>> {
    let (m, k) = g.shape();
    if m == 0 {
        return Some(DVector::zeros(k));
    }
    let e = DMatrix::from_fn(k + 1, m, |i, j| if i < k { g[(j, i)] } else { h[j] });
    let mut f = DVector::zeros(k + 1);
    f[k] = 1.0;
    let v = nnls(&e, &f);
    let r = &e * v - f;
    if r[k].abs() < 1e-12 {
        return None;
    }
    Some(DVector::from_fn(k, |i, _| -r[i] / r[k]))
}

/// Builds a full [`RateAllocation`] (loads, gamma, objective) from per-flow values.
pub fn allocation_from_values(
    net: &Network,
    flows: &[FlowSpec],
    values: BTreeMap<FlowId, f64>,
    objective: &Objective,
) -> Result<RateAllocation, ModelError> {
    let mut alloc = RateAllocation {
        objective_value: objective_value(objective, flows, &values),
        values,
        loads: BTreeMap::new(),
        gamma: BTreeMap::new(),
        lambda: objective.lambda(),
    };
    alloc.loads = link_loads(&alloc, net, flows)?;
    alloc.gamma = alloc
        .loads
        .iter()
        .map(|(id, l)| (id.clone(), aoi_ratio(l.s_lda_bps, l.s_aoi_bps).unwrap_or(1.0)))
        .collect();
    Ok(alloc)
}

/// `S_LDA(l) = sum r_f` and `S_AoI(l) = sum mu_f s_f` over the flows crossing each link.
/// Flows missing from the allocation count as zero.
pub fn link_loads(
    alloc: &RateAllocation,
    net: &Network,
    flows: &[FlowSpec],
) -> Result<BTreeMap<LinkId, LinkLoad>, ModelError> {
    let mut loads: BTreeMap<LinkId, LinkLoad> = net
        .links()
        .iter()
        .map(|l| (l.id.clone(), LinkLoad::default()))
        .collect();
    for f in flows {
        let v = alloc.values.get(&f.id).copied().unwrap_or(0.0);
        for id in &f.path {
            let load = loads
                .get_mut(id)
                .ok_or_else(|| ModelError::UnknownLink(id.clone()))?;
            match f.class {
                FlowClass::Lda => load.s_lda_bps += v,
                FlowClass::Aoi => load.s_aoi_bps += v * f.size_bits,
            }
        }
    }
    Ok(loads)
}

/// AoI share of the planned traffic on a link; 1 on an unloaded link.
pub fn aoi_ratio(s_lda_bps: f64, s_aoi_bps: f64) -> Result<f64, BoundError> {
    if !(s_lda_bps >= 0.0 && s_aoi_bps >= 0.0) {
        return Err(BoundError::NegativeTraffic(s_lda_bps, s_aoi_bps));
    }
    let total = s_lda_bps + s_aoi_bps;
    Ok(if total > 0.0 {
        (s_aoi_bps / total).clamp(0.0, 1.0)
    } else {
        1.0
    })
}

/// AoI that some scheduling policy is guaranteed to achieve for a feasible allocation:
/// `(1 + 2|f|) / (2 mu_f) + d_f`.
pub fn aoi_upper_bound(
    flow: &FlowSpec,
    alloc: &RateAllocation,
    net: &Network,
) -> Result<f64, BoundError> {
    if flow.class != FlowClass::Aoi {
        return Err(BoundError::NotAoi(flow.id.clone()));
    }
    let mu = alloc
        .value(&flow.id)
        .or(flow.freq_hz)
        .unwrap_or(0.0);
    if !(mu > 0.0) {
        return Err(BoundError::ZeroFrequency(flow.id.clone()));
    }
    let hops = flow.hops() as f64;
    Ok((1.0 + 2.0 * hops) / (2.0 * mu) + net.path_latency(&flow.path)?)
}

/// Empty-network delay of every flow, keyed by id.
pub fn propagation_delays(
    net: &Network,
    flows: &[FlowSpec],
) -> Result<BTreeMap<FlowId, f64>, ModelError> {
    flows
        .iter()
        .map(|f| Ok((f.id.clone(), propagation_delay(f, net)?)))
        .collect()
}

/// Distance of `alloc` from satisfying the KKT conditions of `objective`.
///
/// Dual prices for link capacities and multipliers for `x >= 0` are fitted by non-negative
/// least squares against the stationarity equations together with complementary slackness
/// (`nu_l * slack_l = 0`, `omega_f * x_f = 0`); the largest remaining residual is returned.
/// Stationarity is expressed per bps of link capacity, so AoI rows are divided by the
/// packet size. Complementarity terms are measured in units of the largest link capacity
/// so the value does not grow with the bit rate.
/// Capacity violations are not part of this number; check
/// [`RateAllocation::max_relative_overload`] for feasibility.
pub fn kkt_residual(
    alloc: &RateAllocation,
    net: &Network,
    flows: &[FlowSpec],
    objective: &Objective,
) -> f64 {
    let c_max = net.links().iter().map(|l| l.capacity_bps).fold(0.0, f64::max);
    let mut vars = Vec::new();
    for f in flows {
        let Ok(Some(term)) = term_for(objective, f) else {
            continue;
        };
        let x = alloc.values.get(&f.id).copied().unwrap_or(0.0);
        let grad = if x > 0.0 {
            term.grad(x)
        } else {
            match term {
                Term::Linear(w) => w,
                // unbounded marginal gain at zero: nothing can balance it
                Term::NegInverse(_) => return f64::INFINITY,
            }
        };
        let links: Vec<usize> = f.path.iter().filter_map(|id| net.link_index(id)).collect();
        vars.push((grad, coefficient(f), x, links));
    }
    if vars.is_empty() {
        return 0.0;
    }
    let mut link_col: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, _, _, links) in &vars {
        for &l in links {
            let next = link_col.len();
            link_col.entry(l).or_insert(next);
        }
    }
    let nl = link_col.len();
    let nv = vars.len();
    let loads = link_loads(alloc, net, flows).unwrap_or_default();

    // rows: stationarity (nv), link complementarity (nl), bound complementarity (nv)
    let mut a = DMatrix::zeros(2 * nv + nl, nl + nv);
    let mut b = DVector::zeros(2 * nv + nl);
    // stationarity is divided by the capacity coefficient, putting every row in price
    // per bps; the bound multiplier is fitted in the same units
    for (i, (grad, coef, x, links)) in vars.iter().enumerate() {
        for l in links {
            a[(i, link_col[l])] -= 1.0;
        }
        a[(i, nl + i)] = 1.0;
        b[i] = -grad / coef;
        a[(nv + nl + i, nl + i)] = coef * x / c_max;
    }
    for (&li, &col) in &link_col {
        let link = &net.links()[li];
        let load = loads.get(&link.id).map(|l| l.total()).unwrap_or(0.0);
        a[(nv + col, col)] = (link.capacity_bps - load).max(0.0) / c_max;
    }
    let z = nnls(&a, &b);
    (&a * z - b).amax()
}

/// Lawson-Hanson non-negative least squares: `min |A z - b|` subject to `z >= 0`.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut z = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-13 * (1.0 + a.amax() * b.amax());
    let solve_passive = |passive: &[bool]| {
        let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
        let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
        let sol = sub
            .svd(true, true)
            .solve(b, 1e-15)
            .unwrap_or_else(|_| DVector::zeros(cols.len()));
        let mut full = DVector::zeros(n);
        for (k, &j) in cols.iter().enumerate() {
            full[j] = sol[k];
        }
        full
    };
    for _ in 0..3 * n + 10 {
        let w = a.transpose() * (b - a * &z);
        let candidate = (0..n)
            .filter(|&j| !passive[j] && w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let s = solve_passive(&passive);
            let bad: Vec<usize> = (0..n).filter(|&i| passive[i] && s[i] <= 0.0).collect();
            if bad.is_empty() {
                z = s;
                break;
            }
            let alpha = bad
                .iter()
                .map(|&i| z[i] / (z[i] - s[i]))
                .fold(f64::INFINITY, f64::min);
            z += (s - &z) * alpha;
            for i in 0..n {
                if passive[i] && z[i] <= tol {
                    passive[i] = false;
                    z[i] = 0.0;
                }
            }
        }
    }
    z
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowValue {
    pub flow: FlowId,
    pub class: FlowClass,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkReport {
    pub link: LinkId,
    pub s_lda_bps: f64,
    pub s_aoi_bps: f64,
    pub gamma: f64,
}

/// JSON shape of a solved allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationReport {
    pub objective_name: String,
    pub objective: f64,
    pub lambda: f64,
    pub flows: Vec<FlowValue>,
    pub links: Vec<LinkReport>,
    pub diagnostics: SolverDiagnostics,
}

impl AllocationReport {
    pub fn new(solution: &Solution, flows: &[FlowSpec]) -> Self {
        let a = &solution.allocation;
        Self {
            objective_name: solution.objective.name().to_owned(),
            objective: a.objective_value,
            lambda: a.lambda,
            flows: flows
                .iter()
                .map(|f| FlowValue {
                    flow: f.id.clone(),
                    class: f.class,
                    value: a.values.get(&f.id).copied().unwrap_or(0.0),
                })
                .collect(),
            links: a
                .loads
                .iter()
                .map(|(id, l)| LinkReport {
                    link: id.clone(),
                    s_lda_bps: l.s_lda_bps,
                    s_aoi_bps: l.s_aoi_bps,
                    gamma: a.gamma[id],
                })
                .collect(),
            diagnostics: solution.diagnostics.clone(),
        }
    }
}
