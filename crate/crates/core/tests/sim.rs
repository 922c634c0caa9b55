use std::collections::{BTreeMap, BTreeSet, HashMap};

use manet_elect::election::MessageKind;
use manet_elect::engine::RunTrace;
use manet_elect::scenario::{parse_scenario_with, Scenario};
use manet_elect::sim::{run_scenario, RunResult};

fn scenario(text: &str, overrides: &[&str]) -> Scenario {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    parse_scenario_with(text, &o).unwrap()
}

fn shipped(name: &str, overrides: &[&str]) -> Scenario {
    let path = format!("{}/../../scenarios/{name}.toml", env!("CARGO_MANIFEST_DIR"));
    scenario(&std::fs::read_to_string(path).unwrap(), overrides)
}

fn traced(sc: &Scenario) -> RunResult {
    run_scenario(sc, true).unwrap()
}

fn field<'a>(detail: &'a str, key: &str) -> Option<&'a str> {
    detail.split_whitespace().find_map(|w| w.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
}

fn arrivals(trace: &RunTrace) -> impl Iterator<Item = (u64, usize, usize, &str)> {
    trace.records.iter().filter(|r| r.kind == "MessageArrival").map(|r| {
        let d = r.detail.strip_prefix("dropped ").unwrap_or(&r.detail);
        let (pair, rest) = d.split_once(' ').unwrap();
        let (a, b) = pair.split_once("->").unwrap();
        (r.t.ticks(), a.parse().unwrap(), b.parse().unwrap(), rest)
    })
}

#[test]
fn heartbeat_timer_fires_once_per_period() {
    let sc = scenario("algorithm = \"diffusion\"\nnodes = 6\nhorizon = 100\n[heartbeat]\nperiod = 10\n", &[]);
    let run = traced(&sc);
    let mut per_node: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &run.trace.records {
        if r.kind == "TimerFire" && r.detail == "heartbeat" {
            *per_node.entry(r.node.unwrap()).or_default() += 1;
        }
    }
    assert_eq!(per_node.len(), 6);
    assert!(per_node.values().all(|&c| c == 10), "{per_node:?}");
}

#[test]
fn counters_conserve_messages() {
    for name in ["diffusion-static", "candidates-mobile", "masterslave-static", "fig3"] {
        let run = traced(&shipped(name, &["link.loss=0.02"]));
        let m = &run.summary.metrics;
        assert_eq!(m.attempts, m.total_messages() + m.undeliverable, "{name}");
        let delivered = arrivals(&run.trace).count() as u64;
        assert_eq!(delivered + m.in_flight, m.total_messages() - m.lost, "{name}");
        let dropped = run.trace.records.iter().filter(|r| r.detail.starts_with("dropped ")).count() as u64;
        assert_eq!(dropped, m.dead_deliveries, "{name}");
        assert!(m.elections_completed <= m.elections_started, "{name}");
    }
}

#[test]
fn elections_started_matches_trigger_annotations() {
    for name in ["hierarchy-mobile", "diffusion-static", "candidates-static", "fig3"] {
        let run = traced(&shipped(name, &[]));
        let triggers = run.trace.records.iter().filter(|r| r.kind == "ElectionTrigger").count() as u64;
        assert_eq!(triggers, run.summary.metrics.elections_started, "{name}");
    }
}

#[test]
fn candidates_links_are_fifo() {
    let run = traced(&shipped("candidates-mobile", &[]));
    let mut last: HashMap<(usize, usize, u64), u64> = HashMap::new();
    for (_, a, b, rest) in arrivals(&run.trace) {
        if !rest.starts_with("Heartbeat") {
            continue;
        }
        let leader: u64 = field(rest, "leader").unwrap().parse().unwrap();
        let beat: u64 = field(rest, "beat").unwrap().parse().unwrap();
        let prev = last.insert((a, b, leader), beat);
        assert!(prev.is_none_or(|p| p <= beat), "{a}->{b} beat {beat} after {prev:?}");
    }
}

#[test]
fn crashed_nodes_neither_send_nor_act() {
    let sc = shipped("diffusion-static", &[]);
    let d_max = sc.link.delay_max;
    let run = traced(&sc);
    let mut down: HashMap<usize, u64> = HashMap::new();
    for r in &run.trace.records {
        let Some(node) = r.node else { continue };
        match r.kind.as_str() {
            "Crash" => {
                down.insert(node, r.t.ticks());
            }
            "Recover" => {
                down.remove(&node);
            }
            "MessageArrival" => {
                let d = &r.detail;
                if let Some(&t0) = down.get(&node) {
                    assert!(d.starts_with("dropped "), "down node {node} handled {d} (down since {t0})");
                }
                let src: usize = d.trim_start_matches("dropped ").split("->").next().unwrap().parse().unwrap();
                if let Some(&t0) = down.get(&src) {
                    assert!(r.t.ticks() <= t0 + d_max, "{src} sent while down: {d}");
                }
            }
            _ => assert!(!down.contains_key(&node), "down node {node} produced {}", r.kind),
        }
    }
}

#[test]
fn spanning_trees_are_forests() {
    for name in ["diffusion-static", "hierarchy-static", "candidates-mobile", "fig4"] {
        let run = traced(&shipped(name, &[]));
        for (comp, edges) in &run.trees {
            let mut parent: HashMap<usize, usize> = HashMap::new();
            for &(p, child) in edges {
                assert!(parent.insert(child, p).is_none(), "{name} {comp}: {child} has two parents");
            }
            for &start in parent.keys() {
                let mut seen = BTreeSet::from([start]);
                let mut at = start;
                while let Some(&p) = parent.get(&at) {
                    assert!(seen.insert(p), "{name} {comp}: cycle through {p}");
                    at = p;
                }
            }
        }
    }
}

#[test]
fn master_values_never_decrease() {
    for name in ["masterslave-static", "masterslave-mobile"] {
        let run = traced(&shipped(name, &[]));
        let mut held: HashMap<usize, (u64, u64)> = HashMap::new();
        for r in &run.trace.records {
            if r.kind == "Crash" {
                held.remove(&r.node.unwrap());
            }
            if r.kind != "TupleAdopted" {
                continue;
            }
            let (epoch, rest) = r.detail.trim_start_matches('e').split_once(':').unwrap();
            let value = rest.split_once('=').unwrap().1;
            let key = (epoch.parse::<u64>().unwrap(), (value.parse::<f64>().unwrap() * 1e6) as u64);
            let node = r.node.unwrap();
            if let Some(&prev) = held.get(&node) {
                assert!(key > prev, "{name}: node {node} went from {prev:?} to {key:?}");
            }
            held.insert(node, key);
        }
    }
}

#[test]
fn deferred_hello_senders_are_released() {
    let run = traced(&shipped("hierarchy-mobile", &[]));
    assert!(run.trace.records.iter().any(|r| r.kind == "HelloDeferred"));
    let mut pending: BTreeSet<(usize, String)> = BTreeSet::new();
    for r in &run.trace.records {
        let Some(node) = r.node else { continue };
        match r.kind.as_str() {
            "HelloDeferred" => {
                pending.insert((node, r.detail.clone()));
            }
            "HelloReleased" => {
                pending.remove(&(node, r.detail.clone()));
            }
            "Crash" | "Recover" => pending.retain(|(n, _)| *n != node),
            _ => {}
        }
    }
    let electing: BTreeSet<usize> =
        run.trace.snapshots.iter().filter(|s| s.role == "electing").map(|s| s.node).collect();
    for (node, sender) in pending {
        assert!(electing.contains(&node), "node {node} never released {sender}");
    }
}

#[test]
fn backoff_cuts_elections_on_a_clique() {
    let mut edges = String::new();
    for a in 0..6 {
        for b in a + 1..6 {
            edges.push_str(&format!("[{a},{b}],"));
        }
    }
    let text = format!(
        "algorithm = \"candidates\"\nnodes = 6\nhorizon = 2000\n[topology]\nkind = \"explicit\"\nedges = [{edges}]\n\
         [heartbeat]\nperiod = 0\n[faults]\nkind = \"leader-crash\"\nobservers = 5\n"
    );
    for seed in 1..=20 {
        let s = format!("seed={seed}");
        let off = run_scenario(&scenario(&text, &[&s]), false).unwrap();
        let on = run_scenario(&scenario(&text, &[&s, "enhancements.csma_backoff=true"]), false).unwrap();
        let (a, b) = (off.summary.metrics.count(MessageKind::Election), on.summary.metrics.count(MessageKind::Election));
        assert!(b < a, "seed {seed}: on {b} off {a}");
        assert!(on.summary.safe() && off.summary.safe());
    }
}
