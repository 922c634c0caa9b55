use manet_elect::election::MessageKind;
use manet_elect::scenario::parse_scenario;
use manet_elect::sim::run_scenario;

const SCENARIO: &str = include_str!("../../../scenarios/golden-line3.toml");
const GOLDEN: &str = include_str!("golden/line3.jsonl");

/// Hand enumeration of the line 0-1-2 (uids 1-2-3) with node 1 starting:
/// two Elections out, two Acks back, two Leader messages down.
const EXPECTED_MESSAGES: [&str; 6] = [
    "1->2 Election",
    "1->0 Election",
    "2->1 Ack",
    "0->1 Ack",
    "1->0 Leader",
    "1->2 Leader",
];

#[test]
fn line_of_three_matches_golden_trace() {
    let sc = parse_scenario(SCENARIO).unwrap();
    let run = run_scenario(&sc, true).unwrap();
    assert_eq!(run.trace.to_jsonl(), GOLDEN);
}

#[test]
fn golden_trace_holds_the_hand_enumerated_messages() {
    let arrivals: Vec<String> = GOLDEN
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["kind"] == "MessageArrival")
        .map(|v| {
            let d = v["detail"].as_str().unwrap();
            d.split_whitespace().take(2).collect::<Vec<_>>().join(" ")
        })
        .collect();
    assert_eq!(arrivals, EXPECTED_MESSAGES);

    let sc = parse_scenario(SCENARIO).unwrap();
    let run = run_scenario(&sc, false).unwrap();
    let m = &run.summary.metrics;
    assert_eq!(m.total_messages(), 6);
    assert_eq!(m.count(MessageKind::Election), 2);
    assert_eq!(m.count(MessageKind::Ack), 2);
    assert_eq!(m.count(MessageKind::Leader), 2);
    assert_eq!(run.leaders, vec![Some(3); 3]);
}
