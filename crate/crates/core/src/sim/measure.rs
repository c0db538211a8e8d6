//! Age and throughput measurement over delivery logs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::{SimTime, TICKS_PER_SEC};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("no deliveries in or before the window")]
    NoDeliveries,
    #[error("empty measurement window [{0}, {1})")]
    EmptyWindow(SimTime, SimTime),
}

/// One packet reaching its destination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    pub time: SimTime,
    pub gen_time: SimTime,
    pub bits: f64,
}

/// Half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: SimTime,
    pub end: SimTime,
}

impl Window {
    pub fn new(start: SimTime, end: SimTime) -> Self {
        Self { start, end }
    }

    pub fn secs(start_s: f64, end_s: f64) -> Self {
        Self::new(SimTime::from_secs(start_s), SimTime::from_secs(end_s))
    }

    pub fn contains(&self, t: SimTime) -> bool {
        self.start <= t && t < self.end
    }

    pub fn len_secs(&self) -> f64 {
        self.end.saturating_sub(self.start).as_secs()
    }
}

/// Time-average of `a(t) = t - G(t)` over `window`, where `G` is the newest generation time
/// delivered so far. Deliveries that are not newer than `G` leave the age unchanged.
///
/// `deliveries` must be sorted by delivery time. `initial_gen` seeds `G` before the first
/// delivery; without it the window starts at the first delivery if that comes later.
/// The integral is exact: areas are accumulated in integer ticks.
pub fn measure_aoi(
    deliveries: &[Delivery],
    window: Window,
    initial_gen: Option<SimTime>,
) -> Result<f64, MeasureError> {
    if window.end <= window.start {
        return Err(MeasureError::EmptyWindow(window.start, window.end));
    }
    let mut newest = initial_gen;
    let mut start = window.start;
    let mut t_prev = window.start;
    // twice the area, in ticks^2
    let mut area2: i128 = 0;
    let segment = |t0: SimTime, t1: SimTime, g: SimTime| -> i128 {
        let (t0, t1, g) = (t0.0 as i128, t1.0 as i128, g.0 as i128);
        (t1 - t0) * (t1 + t0 - 2 * g)
    };
    for d in deliveries {
        if d.time >= window.end {
            break;
        }
        if d.time > t_prev {
            match newest {
                Some(g) => area2 += segment(t_prev, d.time, g),
                None => start = d.time,
            }
            t_prev = d.time;
        }
        newest = Some(newest.map_or(d.gen_time, |g| g.max(d.gen_time)));
    }
    let g = newest.ok_or(MeasureError::NoDeliveries)?;
    area2 += segment(t_prev, window.end, g);
    let len = (window.end.0 - start.0) as f64;
    Ok(area2 as f64 / (2.0 * len) / TICKS_PER_SEC)
}

/// Delivered bits with delivery time in `window`, per second.
pub fn measure_throughput(deliveries: &[Delivery], window: Window) -> Result<f64, MeasureError> {
    if window.end <= window.start {
        return Err(MeasureError::EmptyWindow(window.start, window.end));
    }
    let bits: f64 = deliveries
        .iter()
        .filter(|d| window.contains(d.time))
        .map(|d| d.bits)
        .sum();
    Ok(bits / window.len_secs())
}

/// Splits a measured age into the periodic-update term `1/(2 mu)`, the propagation term
/// `p_f` and the remaining queueing term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgeDecomposition {
    pub u_avg_s: f64,
    pub p_avg_s: f64,
    pub q_avg_s: f64,
}

pub fn decompose_age(aoi_s: f64, freq_hz: f64, propagation_s: f64) -> AgeDecomposition {
    let u = 1.0 / (2.0 * freq_hz);
    AgeDecomposition {
        u_avg_s: u,
        p_avg_s: propagation_s,
        q_avg_s: aoi_s - u - propagation_s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn d(t: f64, g: f64) -> Delivery {
        Delivery {
            time: SimTime::from_secs(t),
            gen_time: SimTime::from_secs(g),
            bits: 1.0,
        }
    }

    #[test]
    fn sawtooth() {
        let log = [d(2.0, 0.0), d(4.0, 2.0), d(6.0, 4.0), d(8.0, 6.0)];
        let a = measure_aoi(&log, Window::secs(2.0, 8.0), None).unwrap();
        assert_abs_diff_eq!(a, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn stale_delivery_is_ignored() {
        let log = [d(2.0, 0.0), d(4.0, 2.0), d(5.0, 1.0), d(6.0, 4.0), d(8.0, 6.0)];
        let a = measure_aoi(&log, Window::secs(2.0, 8.0), None).unwrap();
        assert_abs_diff_eq!(a, 3.0, epsilon = 1e-12);
    }

    #[test]
    fn single_ramp() {
        let a = measure_aoi(&[d(1.0, 0.0)], Window::secs(1.0, 3.0), None).unwrap();
        assert_abs_diff_eq!(a, 2.0, epsilon = 1e-12);
        // a window opening before the first delivery is clipped to it
        let a = measure_aoi(&[d(1.0, 0.0)], Window::secs(0.0, 3.0), None).unwrap();
        assert_abs_diff_eq!(a, 2.0, epsilon = 1e-12);
        // unless the initial generation time is known
        let a = measure_aoi(&[d(1.0, 0.0)], Window::secs(0.0, 2.0), Some(SimTime::ZERO)).unwrap();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            measure_aoi(&[], Window::secs(0.0, 1.0), None),
            Err(MeasureError::NoDeliveries)
        );
        assert_eq!(
            measure_aoi(&[d(5.0, 0.0)], Window::secs(0.0, 1.0), None),
            Err(MeasureError::NoDeliveries)
        );
        assert!(measure_aoi(&[d(0.0, 0.0)], Window::secs(1.0, 1.0), None).is_err());
    }

    #[test]
    fn throughput() {
        let log: Vec<Delivery> = (0..10)
            .map(|k| Delivery {
                time: SimTime::from_secs(k as f64 + 0.5),
                gen_time: SimTime::ZERO,
                bits: 12000.0,
            })
            .collect();
        let thr = measure_throughput(&log, Window::secs(0.0, 10.0)).unwrap();
        assert_abs_diff_eq!(thr, 12000.0);
        assert_eq!(measure_throughput(&[], Window::secs(0.0, 10.0)).unwrap(), 0.0);
        // a delivery exactly at the window end is outside
        let edge = [d(1.0, 0.0), d(2.0, 0.0)];
        assert_eq!(measure_throughput(&edge, Window::secs(1.0, 2.0)).unwrap(), 1.0);
    }

    #[test]
    fn decomposition() {
        let parts = decompose_age(4.0, 0.25, 1.0);
        assert_eq!(parts.u_avg_s, 2.0);
        assert_eq!(parts.p_avg_s, 1.0);
        assert_eq!(parts.q_avg_s, 1.0);
    }

    /// Reference integral by fine Riemann sum.
    fn riemann(log: &[Delivery], w: Window) -> f64 {
        let n = 200_000u64;
        let step = (w.end.0 - w.start.0) as f64 / n as f64;
        let mut acc = 0.0;
        let mut g: Option<u64> = None;
        let mut i = 0;
        for k in 0..n {
            let t = w.start.0 as f64 + (k as f64 + 0.5) * step;
            while i < log.len() && log[i].time.0 as f64 <= t {
                g = Some(g.map_or(log[i].gen_time.0, |g| g.max(log[i].gen_time.0)));
                i += 1;
            }
            acc += t - g.unwrap() as f64;
        }
        acc / n as f64 / TICKS_PER_SEC
    }

    proptest! {
        #[test]
        fn matches_riemann_sum(gaps in prop::collection::vec((1u64..1000, 0u64..3000), 1..30)) {
            let mut t = 0u64;
            let mut log = Vec::new();
            for (gap, delay) in gaps {
                t += gap * 1000;
                let gen = t.saturating_sub(delay * 1000);
                log.push(Delivery { time: SimTime(t), gen_time: SimTime(gen), bits: 1.0 });
            }
            let w = Window::new(log[0].time, SimTime(t + 500_000));
            let exact = measure_aoi(&log, w, None).unwrap();
            let approx = riemann(&log, w);
            prop_assert!((exact - approx).abs() <= 1e-3 * approx.max(1e-9), "{exact} vs {approx}");
        }
    }
}
