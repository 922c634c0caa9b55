//! Runs a scenario with `key=value` overrides and prints the metrics row.

use manet_elect::metrics::{csv_header, csv_row};
use manet_elect::scenario::parse_scenario_with;
use manet_elect::sim::run_scenario;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = args.next().expect("usage: summary <scenario.toml> [key=value...]");
    let overrides: Vec<String> = args.collect();
    let text = std::fs::read_to_string(&path).expect("readable scenario");
    let sc = parse_scenario_with(&text, &overrides).expect("valid scenario");
    let start = std::time::Instant::now();
    let run = run_scenario(&sc, false).expect("scenario builds");
    println!("{}\n{}", csv_header(), csv_row(&run.summary));
    for v in run.summary.verdicts.iter().filter(|v| !v.pass) {
        println!("FAIL comp {} size {} expected {} observed {:?} stable {}", v.component, v.members.len(), v.expected_leader, v.observed, v.stable);
    }
    eprintln!("{:?}", start.elapsed());
}
