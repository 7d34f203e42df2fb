// Probe: failure reasons for the proposed method under the flaky oracle.
use declutter::eventlog::Event;
use declutter::harness::*;
use declutter::motion::OracleKind;

fn main() {
    let cfg = BatchConfig {
        instance: InstanceConfig {
            n_objects: 20,
            seed: 60_000,
            ..InstanceConfig::default()
        },
        repetitions: 50,
        methods: vec![Method::Proposed],
        oracle: OracleKind::Flaky(0.2),
        budget: None,
        planner: Default::default(),
    };
    let batch = run_batch(&cfg).unwrap();
    let mut reasons: std::collections::BTreeMap<String, u32> = Default::default();
    for e in &batch.episodes {
        if !e.success {
            *reasons
                .entry(e.reason.clone().unwrap_or_default())
                .or_default() += 1;
            println!("seed {}: relocated={} replans={}", e.seed, e.relocated, e.replans);
        }
    }
    println!("failure reasons: {reasons:?}");

    // Replay the first failing episode in detail.
    if let Some(e) = batch.episodes.iter().find(|e| !e.success) {
        println!("== replay seed {}", e.seed);
        for ev in e.log.events() {
            match ev {
                Event::Attempt { .. }
                | Event::EdgeRemoved { .. }
                | Event::Removed { .. }
                | Event::Rebuild { .. }
                | Event::Plan { .. }
                | Event::Outcome { .. } => println!("   {ev}"),
                _ => {}
            }
        }
    }
}
