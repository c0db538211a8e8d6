//! Analytic model of one link carrying a periodic AoI flow next to LDA traffic that fills
//! all spare capacity.
//!
//! Notation: capacity `C`, AoI inter-arrival `T_i`, TDM frame `T_f`, AoI transmission
//! delay `d_t`, propagation delay `d_p`, AoI ratio `gamma` and trade-off factor `lambda`.
//! Throughput and AoI are normalized by `C` and by `d_t / 2` when combined.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClosedFormError {
    #[error("{0} must be positive, got {1}")]
    NonPositive(&'static str, f64),
    #[error("gamma {0} outside the allowed range")]
    Gamma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleLinkParams {
    pub capacity_bps: f64,
    pub t_i: f64,
    /// Minimum output period of the AoI queue; not used by any formula.
    #[serde(default)]
    pub t_o: f64,
    pub t_f: f64,
    pub d_t: f64,
    #[serde(default)]
    pub d_p: f64,
    pub gamma: f64,
    #[serde(default)]
    pub lambda: f64,
}

impl SingleLinkParams {
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }
}

/// Inputs outside the range the formulas were derived for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RegimeWarning {
    /// TDM assumes at least one AoI packet per frame, `T_f >= T_i`.
    FrameShorterThanInterval { t_f: f64, t_i: f64 },
    /// SDM assumes the AoI queue never runs dry, `d_t / gamma >= T_i`.
    AoiQueueIdles { spacing: f64, t_i: f64 },
}

/// A formula value with any regime warnings that apply to its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub warnings: Vec<RegimeWarning>,
}

fn positive(name: &'static str, v: f64) -> Result<(), ClosedFormError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ClosedFormError::NonPositive(name, v))
    }
}

fn tdm_checks(p: &SingleLinkParams) -> Result<Vec<RegimeWarning>, ClosedFormError> {
    positive("capacity", p.capacity_bps)?;
    positive("T_i", p.t_i)?;
    positive("T_f", p.t_f)?;
    if !(p.gamma > 0.0 && p.gamma <= 1.0) {
        return Err(ClosedFormError::Gamma(p.gamma));
    }
    let mut w = Vec::new();
    if p.t_f < p.t_i {
        w.push(RegimeWarning::FrameShorterThanInterval {
            t_f: p.t_f,
            t_i: p.t_i,
        });
    }
    Ok(w)
}

/// `C ((1 - gamma d_t / T_i) - (1 - d_t / T_i) d_t / T_f)`.
pub fn tdm_throughput(p: &SingleLinkParams) -> Result<Estimate, ClosedFormError> {
    let warnings = tdm_checks(p)?;
    let r = p.d_t / p.t_i;
    Ok(Estimate {
        value: p.capacity_bps * ((1.0 - r * p.gamma) - (1.0 - r) * p.d_t / p.t_f),
        warnings,
    })
}

/// `((1 - gamma) T_f + d_t)^2 / (2 T_f) + T_i / 2 + d_t + d_p`.
pub fn tdm_aoi(p: &SingleLinkParams) -> Result<Estimate, ClosedFormError> {
    let warnings = tdm_checks(p)?;
    let wait = (1.0 - p.gamma) * p.t_f + p.d_t;
    Ok(Estimate {
        value: wait * wait / (2.0 * p.t_f) + p.t_i / 2.0 + p.d_t + p.d_p,
        warnings,
    })
}

/// `C (1 - gamma)`.
pub fn sdm_throughput(p: &SingleLinkParams) -> Result<Estimate, ClosedFormError> {
    positive("capacity", p.capacity_bps)?;
    if !(0.0..=1.0).contains(&p.gamma) {
        return Err(ClosedFormError::Gamma(p.gamma));
    }
    Ok(Estimate {
        value: p.capacity_bps * (1.0 - p.gamma),
        warnings: Vec::new(),
    })
}

/// `(d_t / gamma + T_i) / 2 + d_t + d_p`; undefined at `gamma = 0`.
pub fn sdm_aoi(p: &SingleLinkParams) -> Result<Estimate, ClosedFormError> {
    positive("T_i", p.t_i)?;
    if !(p.gamma > 0.0 && p.gamma <= 1.0) {
        return Err(ClosedFormError::Gamma(p.gamma));
    }
    let spacing = p.d_t / p.gamma;
    let warnings = if spacing < p.t_i {
        vec![RegimeWarning::AoiQueueIdles {
            spacing,
            t_i: p.t_i,
        }]
    } else {
        Vec::new()
    };
    Ok(Estimate {
        value: 0.5 * (spacing + p.t_i) + p.d_t + p.d_p,
        warnings,
    })
}

/// `sqrt(lambda)`, clamped to 1.
pub fn optimal_gamma_sdm(lambda: f64) -> f64 {
    lambda.max(0.0).sqrt().min(1.0)
}

/// `1 + d_t / T_f - d_t^2 / (2 lambda T_f T_i)`, clamped to `[0, 1]`.
pub fn optimal_gamma_tdm(lambda: f64, d_t: f64, t_f: f64, t_i: f64) -> Result<f64, ClosedFormError> {
    positive("lambda", lambda)?;
    positive("d_t", d_t)?;
    positive("T_f", t_f)?;
    positive("T_i", t_i)?;
    let g = 1.0 + d_t / t_f - d_t * d_t / (2.0 * lambda * t_f * t_i);
    Ok(g.clamp(0.0, 1.0))
}

/// `throughput / C - lambda * aoi / (d_t / 2)`.
pub fn tradeoff_objective(throughput: f64, aoi: f64, lambda: f64, capacity: f64, d_t: f64) -> f64 {
    throughput / capacity - lambda * aoi / (d_t / 2.0)
}

/// Worst-case AoI excess of IFIL over the best policy for a pulse train.
pub fn ifil_gap_bound(t_i: f64) -> f64 {
    t_i / 2.0
}

/// One row of a gamma sweep of both schedulers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaRow {
    pub gamma: f64,
    pub tdm_throughput: f64,
    pub tdm_aoi: f64,
    pub sdm_throughput: f64,
    pub sdm_aoi: f64,
    pub tdm_objective: f64,
    pub sdm_objective: f64,
}

/// Evaluates both schedulers at `gamma = k / points` for `k = 1..=points`.
pub fn gamma_table(p: &SingleLinkParams, points: usize) -> Result<Vec<GammaRow>, ClosedFormError> {
    (1..=points)
        .map(|k| {
            let q = p.with_gamma(k as f64 / points as f64);
            let tt = tdm_throughput(&q)?.value;
            let ta = tdm_aoi(&q)?.value;
            let st = sdm_throughput(&q)?.value;
            let sa = sdm_aoi(&q)?.value;
            Ok(GammaRow {
                gamma: q.gamma,
                tdm_throughput: tt,
                tdm_aoi: ta,
                sdm_throughput: st,
                sdm_aoi: sa,
                tdm_objective: tradeoff_objective(tt, ta, p.lambda, p.capacity_bps, p.d_t),
                sdm_objective: tradeoff_objective(st, sa, p.lambda, p.capacity_bps, p.d_t),
            })
        })
        .collect()
}
