//! Invariants of the packet simulator over random chains, loads and disciplines.

use fatesim::model::{propagation_delay, FlowClass, FlowSpec, Link, Network};
use fatesim::sim::{self, run_detailed, LdaMode, Scenario, SchedulerKind, SimConfig};
use proptest::prelude::*;

const SCHEDULERS: [SchedulerKind; 6] = [
    SchedulerKind::Sdm,
    SchedulerKind::Tdm { frame_s: None },
    SchedulerKind::Fifo,
    SchedulerKind::PriorityAoi,
    SchedulerKind::WaitingOracle { period_s: None },
    SchedulerKind::PerFlowShare,
];

/// A three-link chain, flows on contiguous sub-paths loading each link to at most `load`.
fn scenario() -> impl Strategy<Value = Scenario> {
    let caps = prop::collection::vec(0.5f64..2.0, 3);
    let lat = prop::collection::vec(0.0f64..0.05, 3);
    let flow = (any::<bool>(), 0.01f64..0.2, 0usize..3, 1usize..4, 0.05f64..1.0);
    let flows = prop::collection::vec(flow, 1..6);
    (caps, lat, flows, 0usize..SCHEDULERS.len(), any::<bool>(), 0.3f64..1.2, any::<u64>())
        .prop_map(|(caps, lat, specs, sched, greedy, load, seed)| {
            let nodes = ["n0", "n1", "n2", "n3"];
            let links: Vec<Link> = (0..3)
                .map(|i| Link::new(&format!("l{i}"), nodes[i], nodes[i + 1], caps[i], lat[i]))
                .collect();
            let n = specs.len() as f64;
            let flows = specs
                .iter()
                .enumerate()
                .map(|(k, &(aoi, size, first, len, weight))| {
                    let last = (first + len).min(3);
                    let ids: Vec<String> = (first..last).map(|i| format!("l{i}")).collect();
                    let path: Vec<&str> = ids.iter().map(String::as_str).collect();
                    let c = caps[first..last].iter().copied().fold(f64::INFINITY, f64::min);
                    let share = load * weight * c / n;
                    if aoi {
                        FlowSpec::aoi(&format!("a{k}"), &path, size).with_freq(share / size)
                    } else {
                        FlowSpec::lda(&format!("d{k}"), &path, size).with_rate(share)
                    }
                })
                .collect();
            let config = SimConfig {
                duration_s: 60.0,
                seed,
                randomize_phases: true,
                lda_mode: if greedy { LdaMode::Greedy } else { LdaMode::Paced },
                ..SimConfig::default()
            };
            Scenario::new(Network::new(nodes, links), flows, SCHEDULERS[sched], config)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn packets_are_conserved_and_causal(sc in scenario()) {
        let run = run_detailed(&sc).unwrap();
        for (i, f) in run.report.flows.iter().enumerate() {
            prop_assert_eq!(f.generated, f.delivered + f.dropped + f.replaced + f.in_flight);
            let p = propagation_delay(&sc.flows[i], &sc.network).unwrap();
            for d in &run.deliveries[i] {
                prop_assert!(d.time.as_secs() >= d.gen_time.as_secs() + p - 1e-9);
            }
            if f.class == FlowClass::Lda {
                prop_assert_eq!(f.replaced, 0);
            }
        }
    }

    #[test]
    fn links_never_exceed_capacity(sc in scenario()) {
        let report = sim::run(&sc).unwrap();
        for (link, stats) in sc.network.links().iter().zip(&report.links) {
            prop_assert!(stats.utilization <= 1.0 + 1e-9, "{}: {}", link.id, stats.utilization);
            let window = report.duration_s - report.warmup_s;
            // a packet in service at each edge of the window may be counted
            let edge = 2.0 * 0.2;
            prop_assert!(stats.lda_bits + stats.aoi_bits <= link.capacity_bps * window + edge);
        }
        for (f, spec) in report.flows.iter().zip(&sc.flows) {
            let c = spec
                .path
                .iter()
                .map(|id| sc.network.link(id).unwrap().capacity_bps)
                .fold(f64::INFINITY, f64::min);
            prop_assert!(f.throughput_bps <= c * 1.01, "{}: {}", f.flow, f.throughput_bps);
        }
    }

    #[test]
    fn age_is_at_least_half_a_period_plus_latency(sc in scenario()) {
        let report = sim::run(&sc).unwrap();
        for (f, spec) in report.flows.iter().zip(&sc.flows) {
            let (Some(aoi), Some(mu)) = (f.aoi_s, spec.freq_hz) else { continue };
            let p = propagation_delay(spec, &sc.network).unwrap();
            prop_assert!(aoi >= 0.98 * (p + 0.5 / mu), "{}: {aoi} < {} + {}", f.flow, p, 0.5 / mu);
        }
    }

    #[test]
    fn runs_are_reproducible(sc in scenario()) {
        prop_assert_eq!(sim::run(&sc).unwrap(), sim::run(&sc).unwrap());
    }
}
