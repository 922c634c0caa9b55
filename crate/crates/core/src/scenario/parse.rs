use thiserror::Error;
use toml::{Table, Value};

use super::{Algorithm, FaultKind, Scenario, TopologyKind};
use crate::election::{CriterionMode, CHARGE_SCALE, MICRO};
use crate::engine::FaultSchedule;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("invalid `{key}`: {reason}")]
    Validation { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation { key: key.to_string(), reason: reason.into() }
}

fn parse_error(text: &str, err: &toml::de::Error) -> ScenarioError {
    let offset = err.span().map_or(0, |s| s.start).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    ScenarioError::Parse { line, column, message: err.message().to_string() }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario_with(text, &[])
}

/// Parses `text` and then applies `key=value` overrides in order.
pub fn parse_scenario_with(text: &str, overrides: &[String]) -> Result<Scenario, ScenarioError> {
    let mut table: Table = text.parse().map_err(|e| parse_error(text, &e))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let defaults = Table::try_from(Scenario::default()).expect("defaults serialize");
    check_keys(&table, &defaults, "")?;
    check_enums(&table)?;
    let scenario: Scenario =
        Value::Table(table).try_into().map_err(|e: toml::de::Error| invalid("", e.message().to_string()))?;
    validate(&scenario)?;
    Ok(scenario)
}

/// `key=value` with a dotted key; the value is read as a TOML literal and
/// falls back to a bare string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), ScenarioError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| invalid(assignment, "override must look like key=value"))?;
    let (key, raw) = (key.trim(), raw.trim());
    let value = match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").expect("just parsed"),
        Err(_) => Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = table;
    for part in &parts[..parts.len() - 1] {
        let entry = cur.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(invalid(key, format!("`{part}` is not a section"))),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Keys that exist but have no default value to compare against.
const OPTIONAL_KEYS: [&str; 6] =
    ["uids", "topology.positions", "topology.edges", "faults.schedule", "masterslave.masters", "masterslave.aspirants"];

fn check_keys(table: &Table, defaults: &Table, prefix: &str) -> Result<(), ScenarioError> {
    for (k, v) in table {
        let full = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        if OPTIONAL_KEYS.contains(&full.as_str()) {
            continue;
        }
        match (defaults.get(k), v) {
            (None, _) => return Err(ScenarioError::UnknownKey { key: full }),
            (Some(Value::Table(d)), Value::Table(t)) => check_keys(t, d, &full)?,
            (Some(Value::Table(_)), _) => return Err(invalid(&full, "expected a section")),
            _ => {}
        }
    }
    Ok(())
}

fn check_enums(table: &Table) -> Result<(), ScenarioError> {
    let rules: [(&str, &[&str]); 6] = [
        ("algorithm", &["hierarchy", "diffusion", "candidates", "masterslave"]),
        ("topology.kind", &["random", "ring", "line", "explicit"]),
        ("mobility.kind", &["static", "random-waypoint"]),
        ("criterion.mode", &["uid-only", "composite"]),
        ("election.bootstrap", &["preinstalled", "all", "single", "none"]),
        ("faults.kind", &["none", "random", "explicit", "leader-crash"]),
    ];
    for (key, allowed) in rules {
        let mut cur = Some(table);
        let parts: Vec<&str> = key.split('.').collect();
        for p in &parts[..parts.len() - 1] {
            cur = cur.and_then(|t| t.get(*p)).and_then(Value::as_table);
        }
        if let Some(v) = cur.and_then(|t| t.get(parts[parts.len() - 1])) {
            match v.as_str() {
                Some(s) if allowed.contains(&s) => {}
                _ => return Err(invalid(key, format!("expected one of {}, got {v}", allowed.join("|")))),
            }
        }
    }
    Ok(())
}

pub(super) fn validate(s: &Scenario) -> Result<(), ScenarioError> {
    let n = s.nodes;
    if n == 0 {
        return Err(invalid("nodes", "must be at least 1"));
    }
    if s.horizon == 0 {
        return Err(invalid("horizon", "must be positive"));
    }
    if !s.uids.is_empty() {
        if s.uids.len() != n {
            return Err(invalid("uids", format!("expected {n} entries, got {}", s.uids.len())));
        }
        let mut sorted = s.uids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != n || sorted[0] == 0 {
            return Err(invalid("uids", "must be distinct and at least 1"));
        }
    }
    let t = &s.topology;
    if t.width <= 0 || t.height <= 0 {
        return Err(invalid("topology.width", "arena must have positive size"));
    }
    if t.kind != TopologyKind::Explicit {
        if t.radio_range <= 0 {
            return Err(invalid("topology.radio_range", "must be positive"));
        }
        if !t.positions.is_empty() || !t.edges.is_empty() {
            return Err(invalid("topology.positions", "positions and edges need kind = explicit"));
        }
    } else {
        if !t.positions.is_empty() && t.positions.len() != n {
            return Err(invalid("topology.positions", format!("expected {n} entries")));
        }
        if let Some(e) = t.edges.iter().find(|e| e[0] >= n || e[1] >= n || e[0] == e[1]) {
            return Err(invalid("topology.edges", format!("bad edge {:?}", e)));
        }
    }
    let l = &s.link;
    if l.delay_min == 0 || l.delay_max < l.delay_min {
        return Err(invalid("link.delay_min", "need 1 <= delay_min <= delay_max"));
    }
    if !(0.0..1.0).contains(&l.loss) {
        return Err(invalid("link.loss", "must be in [0, 1)"));
    }
    if s.heartbeat.enabled() && s.heartbeat.timeout <= s.heartbeat.period {
        return Err(invalid("heartbeat.timeout", "must exceed heartbeat.period"));
    }
    if s.criterion_mode() == CriterionMode::Composite && s.criterion.w_b + s.criterion.w_m != MICRO {
        return Err(invalid("criterion.w_b", format!("w_b + w_m must equal {MICRO}")));
    }
    let m = &s.mobility;
    if !m.is_static() && (m.speed_min == 0 || m.speed_min > m.speed_max || m.pause_min > m.pause_max) {
        return Err(invalid("mobility.speed_min", "need 1 <= speed_min <= speed_max and pause_min <= pause_max"));
    }
    if m.period == 0 || m.window == 0 {
        return Err(invalid("mobility.period", "period and window must be positive"));
    }
    let b = &s.battery;
    if b.initial_min > b.initial_max || b.initial_max > CHARGE_SCALE {
        return Err(invalid("battery.initial_min", format!("need initial_min <= initial_max <= {CHARGE_SCALE}")));
    }
    if s.algorithm == Algorithm::Masterslave && s.round_period() < 3 * l.delay_max + 3 {
        return Err(invalid("round.period", format!("must be at least {}", 3 * l.delay_max + 3)));
    }
    if s.election.starter >= n {
        return Err(invalid("election.starter", "not a node index"));
    }
    if s.election.timeout == 0 {
        return Err(invalid("election.timeout", "must be positive"));
    }
    let f = &s.faults;
    if !(0.0..=1.0).contains(&f.rate) || !(0.0..=1.0).contains(&f.leader_probability) {
        return Err(invalid("faults.rate", "rates must be in [0, 1]"));
    }
    match f.kind {
        FaultKind::Random if f.epoch_length <= f.offset + f.recover_after => {
            return Err(invalid("faults.epoch_length", "must exceed offset + recover_after"));
        }
        FaultKind::Explicit => {
            if let Some(e) = f.schedule.iter().find(|e| e.node >= n) {
                return Err(invalid("faults.schedule", format!("node {} out of range", e.node)));
            }
            FaultSchedule::new(f.schedule.clone()).map_err(|e| invalid("faults.schedule", e.to_string()))?;
        }
        _ => {}
    }
    if let Some(x) = s.masterslave.masters.iter().chain(&s.masterslave.aspirants).find(|&&x| x >= n) {
        return Err(invalid("masterslave.masters", format!("node {x} out of range")));
    }
    Ok(())
}
