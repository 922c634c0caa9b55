//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any of them fails.

use std::time::{Duration, Instant};

use manet_elect::election::CriterionMode;
use manet_elect::experiments::{ali_fixture, final_round_propagation, run_fig3, run_fig4, run_sweep};
use manet_elect::metrics::{csv_row, mean_by_size, validate_ali_formula, validate_linear_bound};
use manet_elect::scenario::{parse_scenario, Algorithm, Bootstrap, FaultKind, Scenario, TopologyKind};
use manet_elect::network::MobilityKind;
use manet_elect::sim::run_scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn scenarios_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn shipped(name: &str) -> Scenario {
    let text = std::fs::read_to_string(scenarios_dir().join(format!("{name}.toml"))).unwrap();
    parse_scenario(&text).unwrap()
}

fn timed(limit: Duration, o: Outcome, start: Instant) -> Outcome {
    let took = start.elapsed();
    let pass = o.pass && took < limit;
    outcome(pass, format!("{}, {:.1}s of {}s", o.detail, took.as_secs_f64(), limit.as_secs()))
}

fn fig3() -> Outcome {
    let start = Instant::now();
    let seeds: Vec<u64> = (1..=10).collect();
    let t = run_fig3(&shipped("fig3"), &seeds).unwrap();
    let ratio = t.ratio();
    let wide = t.seeds_where(|r| r.off >= 3 * r.on);
    let o = outcome(
        ratio <= 0.35 && wide >= 9,
        format!("ON/OFF ratio {ratio:.3} (max 0.35), OFF >= 3x ON in {wide}/10 seeds (need 9)"),
    );
    timed(Duration::from_secs(30), o, start)
}

fn fig4() -> Outcome {
    let start = Instant::now();
    let seeds: Vec<u64> = (1..=100).collect();
    let t = run_fig4(&shipped("fig4"), &seeds).unwrap();
    let fewer = t.seeds_where(|r| r.on < r.off);
    let cut = t.reduction();
    let o = outcome(
        fewer >= 95 && cut >= 0.30,
        format!("ON < OFF in {fewer}/100 seeds (need 95), mean reduction {:.1}% (need 30%)", cut * 100.0),
    );
    timed(Duration::from_secs(30), o, start)
}

/// One randomized safety scenario. `i` walks the cross product of
/// algorithm, size, mobility and fault class.
fn safety_case(i: usize, rng: &mut ChaCha8Rng) -> Scenario {
    let algorithm = Algorithm::ALL[i % 4];
    let n = [10, 50, 100][(i / 4) % 3];
    let mobile = (i / 12) % 2 == 1;
    let faults = (i / 24) % 3;
    let mut sc = Scenario { name: format!("safety-{i}"), algorithm, nodes: n, seed: rng.random_range(1..1_000_000), ..Scenario::default() };
    let side = (120.0 * (n as f64).sqrt()) as i64;
    sc.topology.width = side;
    sc.topology.height = side;
    sc.horizon = 5000;
    sc.election.bootstrap = if rng.random_bool(0.5) { Bootstrap::All } else { Bootstrap::Preinstalled };
    if mobile {
        sc.mobility.kind = MobilityKind::RandomWaypoint;
        sc.mobility.until = 2500;
    } else if rng.random_bool(0.5) {
        sc.criterion.mode = CriterionMode::Composite;
    }
    for e in [
        &mut sc.enhancements.clustering,
        &mut sc.enhancements.join_gating,
        &mut sc.enhancements.inquiry_on_recover,
        &mut sc.enhancements.starter_quality,
        &mut sc.enhancements.csma_backoff,
        &mut sc.enhancements.slave_participation,
    ] {
        *e = rng.random_bool(0.5);
    }
    match faults {
        1 => {
            sc.faults.kind = FaultKind::Random;
            sc.faults.leader_probability = 0.0;
            sc.faults.epochs = 2;
            sc.faults.epoch_length = 800;
        }
        2 => {
            sc.faults.kind = FaultKind::LeaderCrash;
            sc.faults.at = 1000;
        }
        _ => {}
    }
    sc
}

fn safety() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut pass, mut fail, mut unstable) = (0, 0, 0);
    let mut first_fail = None;
    for i in 0..200 {
        let sc = safety_case(i, &mut rng);
        let run = run_scenario(&sc, false).unwrap();
        let (p, f, u) = run.summary.safety_counts();
        pass += p;
        fail += f;
        unstable += u;
        if f > 0 && first_fail.is_none() {
            first_fail = Some(format!(" first failure {} seed {}", sc.name, sc.seed));
        }
    }
    let o = outcome(
        fail == 0,
        format!("{pass} components pass, {fail} fail, {unstable} unstable reported apart{}", first_fail.unwrap_or_default()),
    );
    timed(Duration::from_secs(120), o, start)
}

fn extrema() -> Outcome {
    let mut worst = Vec::new();
    for algorithm in Algorithm::ALL {
        let mut right = 0;
        for seed in 1..=100 {
            let mut sc = Scenario { algorithm, nodes: 30, seed, horizon: 4000, ..Scenario::default() };
            sc.topology.width = 700;
            sc.topology.height = 700;
            sc.criterion.mode = CriterionMode::Composite;
            sc.election.bootstrap = Bootstrap::All;
            let run = run_scenario(&sc, false).unwrap();
            // Verdicts come from the brute-force oracle over the raw inputs.
            let v = &run.summary.verdicts;
            if v.len() == 1 && v[0].pass && v[0].stable {
                right += 1;
            }
        }
        worst.push((algorithm.as_str(), right));
    }
    let pass = worst.iter().all(|w| w.1 == 100);
    let detail = worst.iter().map(|(a, r)| format!("{a} {r}/100")).collect::<Vec<_>>().join(", ");
    outcome(pass, detail)
}

fn linearity() -> Outcome {
    let sizes = [8, 16, 32, 64, 128];
    let seeds: Vec<u64> = (1..=10).collect();
    let mut parts = Vec::new();
    let mut pass = true;
    for algorithm in [Algorithm::Diffusion, Algorithm::Candidates] {
        let mut base = Scenario { algorithm, ..Scenario::default() };
        base.topology.kind = TopologyKind::Ring;
        base.heartbeat.period = 0;
        let rows = run_sweep(&base, &sizes, &seeds).unwrap();
        let raw: Vec<(usize, u64)> = rows.iter().map(|r| (r.nodes, r.metrics.election_traffic())).collect();
        let series = mean_by_size(&raw, 10).unwrap();
        let v = validate_linear_bound(&series).unwrap();
        pass &= v.pass;
        let ratios = v.ratios.iter().map(|r| format!("{:.2}", r.1)).collect::<Vec<_>>().join("/");
        parts.push(format!("{} ratios {ratios} (mean {:.2})", algorithm.as_str(), v.mean));
    }
    outcome(pass, parts.join("; "))
}

fn ali() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in 1..=3 {
        let run = run_scenario(&ali_fixture(p), false).unwrap();
        let measured = final_round_propagation(&run).map_or(0, |x| x.count());
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("tests/fixtures/ali-p{p}.txt"));
        let text = std::fs::read_to_string(path).unwrap();
        let oracle = text.lines().filter(|l| l.contains("->")).count() as u64;
        let v = validate_ali_formula(&run.pmp_degrees, measured).unwrap();
        pass &= measured == oracle;
        let note = if v.predicted == oracle { String::new() } else { format!(" formula disagrees with oracle ({})", v.predicted) };
        parts.push(format!("P={p} measured {measured} oracle {oracle} formula {}{note}", v.predicted));
    }
    outcome(pass, parts.join("; "))
}

fn golden() -> Outcome {
    let sc = shipped("golden-line3");
    let run = run_scenario(&sc, true).unwrap();
    let expected = include_str!("golden/line3.jsonl");
    let same = run.trace.to_jsonl() == expected;
    let msgs = run.summary.metrics.total_messages();
    outcome(same && msgs == 6, format!("byte-identical {same}, {msgs} messages"))
}

fn determinism() -> Outcome {
    let mut names: Vec<String> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .filter_map(|e| e.ok()?.file_name().to_str()?.strip_suffix(".toml").map(str::to_string))
        .collect();
    names.sort();
    let mut differing = Vec::new();
    for name in &names {
        let sc = shipped(name);
        let a = run_scenario(&sc, true).unwrap();
        let b = run_scenario(&sc, true).unwrap();
        if csv_row(&a.summary) != csv_row(&b.summary) || a.trace.to_jsonl() != b.trace.to_jsonl() {
            differing.push(name.clone());
        }
    }
    let per_algorithm = Algorithm::ALL
        .iter()
        .all(|a| names.iter().filter(|n| n.starts_with(a.as_str())).count() >= 2);
    outcome(
        differing.is_empty() && per_algorithm,
        format!("{} scenarios run twice, differing: {differing:?}", names.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("fig3 inquiry reproduction", fig3),
        ("fig4 backoff reproduction", fig4),
        ("safety suite", safety),
        ("extrema correctness", extrema),
        ("linearity", linearity),
        ("ali formula", ali),
        ("golden trace", golden),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let mark = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {name}: {mark} ({})", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
