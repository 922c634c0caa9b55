mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use manet_elect::experiments::{self, ExperimentError};
use manet_elect::metrics::{mean_by_size, validate_ali_formula, validate_linear_bound};
use manet_elect::scenario::{parse_scenario_with, Algorithm, Scenario, ScenarioError};
use manet_elect::sim::{run_scenario, SimError};
use thiserror::Error;

const FIG3: &str = include_str!("../../../scenarios/fig3.toml");
const FIG4: &str = include_str!("../../../scenarios/fig4.toml");

#[derive(Parser, Debug)]
#[command(name = "manet", version, about = "Deterministic leader-election simulator for mobile ad-hoc networks")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Scenario file (TOML). Defaults apply to absent keys.
    #[arg(long, global = true, value_name = "FILE")]
    scenario: Option<PathBuf>,
    /// Run a single seed instead of the scenario's own.
    #[arg(long, global = true, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Inclusive seed range, e.g. `1..10`.
    #[arg(long, global = true, value_name = "A..B", value_parser = parse_seeds)]
    seeds: Option<SeedRange>,
    #[arg(long, global = true, value_name = "NAME")]
    algorithm: Option<String>,
    /// Override one key, e.g. `--set heartbeat.period=20`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Write the JSONL event trace.
    #[arg(long, global = true)]
    trace: bool,
    /// Assert the acceptance thresholds; exit 3 when they fail.
    #[arg(long, global = true)]
    check: bool,
    /// Print the full default scenario and exit.
    #[arg(long)]
    print_defaults: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the scenario once per seed (the default).
    Run,
    /// Inquiry-on-recovery OFF/ON comparison of elections started.
    Fig3,
    /// Backoff OFF/ON comparison of Election messages.
    Fig4,
    /// Ring sweep over sizes; for masterslave, piconet fixtures over P.
    Sweep {
        /// Ring sizes, or PMP counts for masterslave.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("check failed: {0}")]
    Check(String),
    #[error("{0}")]
    Internal(String),
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Sim(SimError::Scenario(s)) => s.into(),
            ExperimentError::Sim(s) => CliError::Sim(s),
            ExperimentError::Validation { .. } => CliError::Config(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Check(_) => 3,
            CliError::Sim(_) | CliError::Write { .. } | CliError::Internal(_) => 1,
        }
    }
}

#[derive(Clone, Debug)]
struct SeedRange(Vec<u64>);

fn parse_seeds(s: &str) -> Result<SeedRange, String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad seed `{a}`"))?;
    let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| format!("bad seed `{b}`"))?;
    if a > b {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok(SeedRange((a..=b).collect()))
}

impl Cli {
    fn load(&self, fallback: &str) -> Result<Scenario, CliError> {
        let text = match &self.scenario {
            Some(p) => std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => fallback.to_string(),
        };
        let mut overrides = Vec::new();
        if let Some(a) = &self.algorithm {
            overrides.push(format!("algorithm={a}"));
        }
        overrides.extend(self.overrides.iter().cloned());
        Ok(parse_scenario_with(&text, &overrides)?)
    }

    fn seed_list(&self, sc: &Scenario, default: Option<std::ops::RangeInclusive<u64>>) -> Vec<u64> {
        match (&self.seeds, self.seed, default) {
            (Some(list), _, _) => list.0.clone(),
            (None, Some(s), _) => vec![s],
            (None, None, Some(r)) => r.collect(),
            _ => vec![sc.seed],
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let sc = cli.load("")?;
    let seeds = cli.seed_list(&sc, None);
    let mut summaries = Vec::new();
    for &seed in &seeds {
        let mut s = sc.clone();
        s.seed = seed;
        let r = run_scenario(&s, cli.trace)?;
        if cli.trace {
            let name = if seeds.len() == 1 { "trace.jsonl".to_string() } else { format!("trace-{seed}.jsonl") };
            output::write(&cli.out, &name, &r.trace.to_jsonl())?;
        }
        let (p, f, u) = r.summary.safety_counts();
        let m = &r.summary.metrics;
        println!(
            "seed {seed}: {} messages, {} elections started, {} completed, safety {p} pass {f} fail {u} unstable",
            m.total_messages(),
            m.elections_started,
            m.elections_completed
        );
        summaries.push(r.summary);
    }
    output::write(&cli.out, "metrics.csv", &output::metrics_csv(&summaries))?;
    output::write(&cli.out, "verdicts.jsonl", &output::verdicts_jsonl(&summaries))?;
    if cli.check {
        let failing: Vec<u64> = summaries.iter().filter(|s| !s.safe()).map(|s| s.seed).collect();
        if !failing.is_empty() {
            return Err(CliError::Check(format!("safety verdicts failed for seeds {failing:?}")));
        }
    }
    Ok(())
}

fn paired(cli: &Cli, fig: &str, fallback: &str, default: std::ops::RangeInclusive<u64>) -> Result<(), CliError> {
    let sc = cli.load(fallback)?;
    let seeds = cli.seed_list(&sc, Some(default));
    let table = if fig == "fig3" { experiments::run_fig3(&sc, &seeds)? } else { experiments::run_fig4(&sc, &seeds)? };
    output::write(&cli.out, &format!("{fig}.csv"), &table.to_csv())?;
    let rows: Vec<_> = table.runs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
    output::write(&cli.out, "metrics.csv", &output::metrics_csv(&rows))?;
    let n = table.rows.len();
    let ratio = table.ratio();
    println!(
        "{fig}: {n} seeds, mean OFF {:.2}, mean ON {:.2}, ON/OFF {ratio:.3}",
        table.mean(experiments::Arm::Off),
        table.mean(experiments::Arm::On)
    );
    if !cli.check {
        return Ok(());
    }
    let ok = if fig == "fig3" {
        let wide = table.seeds_where(|r| r.off >= 3 * r.on);
        ratio <= 0.35 && wide * 10 >= n * 9
    } else {
        let fewer = table.seeds_where(|r| r.on < r.off);
        fewer * 100 >= n * 95 && table.reduction() >= 0.30
    };
    if ok {
        Ok(())
    } else {
        Err(CliError::Check(format!("{fig} thresholds not met")))
    }
}

fn sweep(cli: &Cli, sizes: Option<&[usize]>) -> Result<(), CliError> {
    let sc = cli.load("")?;
    if sc.algorithm == Algorithm::Masterslave {
        return ali_sweep(cli, sizes.unwrap_or(&[1, 2, 3]));
    }
    let sizes = sizes.unwrap_or(&[8, 16, 32, 64, 128]);
    let seeds = cli.seed_list(&sc, Some(1..=10));
    let rows = experiments::run_sweep(&sc, sizes, &seeds)?;
    output::write(&cli.out, "metrics.csv", &output::metrics_csv(&rows))?;
    let raw: Vec<(usize, u64)> = rows.iter().map(|r| (r.nodes, r.metrics.election_traffic())).collect();
    let min_runs = seeds.len().min(10);
    let verdict = mean_by_size(&raw, min_runs).and_then(|s| validate_linear_bound(&s));
    match verdict {
        Ok(v) => {
            for (n, r) in &v.ratios {
                println!("n={n}: {r:.3} election messages per node");
            }
            println!("linear bound: {} (max deviation {:.1}%)", if v.pass { "pass" } else { "fail" }, v.max_deviation * 100.0);
            if cli.check && !v.pass {
                return Err(CliError::Check("messages/n ratios outside tolerance".into()));
            }
        }
        Err(e) if cli.check => return Err(CliError::Check(e.to_string())),
        Err(e) => println!("linear bound not evaluated: {e}"),
    }
    Ok(())
}

fn ali_sweep(cli: &Cli, ps: &[usize]) -> Result<(), CliError> {
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for &p in ps {
        if p == 0 {
            return Err(CliError::Config("sweep sizes for masterslave are PMP counts and must be >= 1".into()));
        }
        let run = run_scenario(&experiments::ali_fixture(p), false)?;
        let measured = experiments::final_round_propagation(&run).map_or(0, |x| x.count());
        let v = validate_ali_formula(&run.pmp_degrees, measured).map_err(|e| CliError::Check(e.to_string()))?;
        println!("P={p}: final-round messages {measured}, formula {}", v.predicted);
        if !v.pass {
            bad.push(p);
        }
        rows.push(run.summary);
    }
    output::write(&cli.out, "metrics.csv", &output::metrics_csv(&rows))?;
    if cli.check && !bad.is_empty() {
        return Err(CliError::Check(format!("formula mismatch for P in {bad:?}")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.print_defaults {
        print!("{}", Scenario::defaults_toml());
        return ExitCode::SUCCESS;
    }
    let result = match &cli.command {
        None | Some(Command::Run) => run(&cli),
        Some(Command::Fig3) => paired(&cli, "fig3", FIG3, 1..=10),
        Some(Command::Fig4) => paired(&cli, "fig4", FIG4, 1..=100),
        Some(Command::Sweep { sizes }) => sweep(&cli, sizes.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
