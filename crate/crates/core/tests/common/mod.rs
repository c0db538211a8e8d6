//! Exhaustive grid search over tiny allocation problems.

#![allow(dead_code)]

use fatesim::model::{FlowSpec, Link, Network};

/// Chain a -> b -> c -> d over links l0, l1, l2.
pub fn chain(caps: &[f64]) -> Network {
    let nodes = ["a", "b", "c", "d"];
    let links = caps
        .iter()
        .enumerate()
        .map(|(i, &c)| Link::new(&format!("l{i}"), nodes[i], nodes[i + 1], c, 0.0))
        .collect();
    Network::new(nodes, links)
}

pub struct Var {
    pub aoi: bool,
    pub coef: f64,
    pub links: Vec<usize>,
}

/// Best objective (maximization sense) over a grid of step `1e-3` of each variable's
/// range, followed by two zoomed grids around the best point. The last variable is
/// pushed to its largest feasible value, which is optimal because every term is
/// increasing in its variable.
pub fn grid_oracle(caps: &[f64], vars: &[Var], value: &dyn Fn(&[f64]) -> f64) -> f64 {
    let n = vars.len();
    let range: Vec<f64> = vars
        .iter()
        .map(|v| v.links.iter().map(|&l| caps[l] / v.coef).fold(f64::INFINITY, f64::min))
        .collect();
    let mut lo = vec![0.0; n - 1];
    let mut hi = range[..n - 1].to_vec();
    let mut steps = 1000usize;
    let mut best = (f64::NEG_INFINITY, vec![0.0; n - 1]);
    for _ in 0..3 {
        best = grid_pass(caps, vars, value, &lo, &hi, steps).max_by(best);
        let arg = best.1.clone();
        for i in 0..n - 1 {
            let h = (hi[i] - lo[i]) / steps as f64;
            lo[i] = (arg[i] - 2.0 * h).max(0.0);
            hi[i] = (arg[i] + 2.0 * h).min(range[i]);
        }
        steps = 200;
    }
    best.0
}

trait MaxBy {
    fn max_by(self, other: Self) -> Self;
}

impl MaxBy for (f64, Vec<f64>) {
    fn max_by(self, other: Self) -> Self {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }
}

fn grid_pass(
    caps: &[f64],
    vars: &[Var],
    value: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    steps: usize,
) -> (f64, Vec<f64>) {
    let n = vars.len();
    let mut best = (f64::NEG_INFINITY, vec![0.0; n - 1]);
    let mut idx = vec![0usize; n - 1];
    loop {
        let mut x: Vec<f64> = (0..n - 1)
            .map(|i| lo[i] + idx[i] as f64 / steps as f64 * (hi[i] - lo[i]))
            .collect();
        let mut resid = caps.to_vec();
        for (i, v) in vars[..n - 1].iter().enumerate() {
            for &l in &v.links {
                resid[l] -= v.coef * x[i];
            }
        }
        let last = &vars[n - 1];
        let room = last
            .links
            .iter()
            .map(|&l| resid[l] / last.coef)
            .fold(f64::INFINITY, f64::min);
        if room > 0.0 && x.iter().all(|&v| v > 0.0) && resid.iter().all(|&r| r >= -1e-12) {
            let head = x.clone();
            x.push(room);
            let v = value(&x);
            if v > best.0 {
                best = (v, head);
            }
        }
        // odometer over the first n-1 coordinates
        let mut k = 0;
        loop {
            if k == n - 1 {
                return best;
            }
            idx[k] += 1;
            if idx[k] <= steps {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

pub fn lac_value(vars: &[Var], lambda: f64) -> impl Fn(&[f64]) -> f64 + '_ {
    move |x| {
        vars.iter()
            .zip(x)
            .map(|(v, &x)| if v.aoi { -lambda / (2.0 * x) } else { x })
            .sum()
    }
}

pub fn min_aoi_value(vars: &[Var], s_lda: f64) -> impl Fn(&[f64]) -> f64 + '_ {
    move |x| {
        -vars
            .iter()
            .zip(x)
            .map(|(v, &x)| if v.aoi { 1.0 / (2.0 * x) } else { s_lda / (2.0 * x) })
            .sum::<f64>()
    }
}

pub fn flows_and_vars(spec: &[(bool, f64, usize, usize)]) -> (Vec<FlowSpec>, Vec<Var>) {
    let mut flows = Vec::new();
    let mut vars = Vec::new();
    for (i, &(aoi, size, first, len)) in spec.iter().enumerate() {
        let links: Vec<usize> = (first..first + len).collect();
        let names: Vec<String> = links.iter().map(|l| format!("l{l}")).collect();
        let path: Vec<&str> = names.iter().map(String::as_str).collect();
        let id = format!("f{i}");
        let (flow, coef) = if aoi {
            (FlowSpec::aoi(&id, &path, size), size)
        } else {
            (FlowSpec::lda(&id, &path, 1.0), 1.0)
        };
        flows.push(flow);
        vars.push(Var { aoi, coef, links });
    }
    (flows, vars)
}

