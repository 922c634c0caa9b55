//! Prints the JSONL trace of a scenario file.

use manet_elect::scenario::parse_scenario;
use manet_elect::sim::run_scenario;

fn main() {
    let path = std::env::args().nth(1).expect("usage: trace <scenario.toml>");
    let text = std::fs::read_to_string(&path).expect("readable scenario");
    let sc = parse_scenario(&text).expect("valid scenario");
    let run = run_scenario(&sc, true).expect("scenario builds");
    print!("{}", run.trace.to_jsonl());
    eprintln!("{:?}", run.summary.metrics.messages_by_kind);
}
