//! Command-line front end: analytic sweeps, Monte Carlo scenario runs and
//! the elastic-vs-fixed spectrum comparison.
//!
//! Every command is reproducible: all randomness flows from the `--seed`
//! flag through named ChaCha8 streams, outputs embed a manifest with the
//! fully resolved configuration, and re-running a manifest regenerates the
//! report byte for byte. Exit codes: 0 success, 2 usage error, 1 runtime or
//! domain error.

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use roadm_cluster::fullload::{
    builtin_scenarios, run_scenarios, ScenarioCase, SimConfig, RNG_ALGORITHM,
};
use roadm_cluster::lee::{analytic_sweep, load_averaged_blocking};
use roadm_cluster::topology::{classify_nonblocking, validate_sizing, ClusterConfig, InterconnectPattern, NonblockingClass};
use roadm_cluster::eon::{compare_approaches, width_table_csv, DEFAULT_GRID_SLOTS};

/// Default per-(degree, wavelength) request load for auto-scaled runs,
/// chosen so the built-in scenarios land in the e-6..e-5 blocking band.
const DEFAULT_FILL: f64 = 0.85;

#[derive(Parser)]
#[command(
    name = "roadm-cluster",
    version,
    about = "Three-stage ROADM cluster-node simulator and flex-grid spectrum toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed-form blocking model over a load/packing grid.
    Analytic(AnalyticArgs),
    /// Run the full-load Monte Carlo scenarios.
    Montecarlo(MontecarloArgs),
    /// Flex-grid spectrum studies.
    #[command(subcommand)]
    Eon(EonCommand),
}

#[derive(Args)]
struct AnalyticArgs {
    /// Line cards per chassis (N).
    #[arg(long, short = 'n')]
    n: u32,
    /// Interconnect chassis count (M).
    #[arg(long, short = 'm')]
    m: u32,
    /// Per-card loads: a single value, a comma list, or start:end:step.
    #[arg(long, default_value = "0:1:0.05")]
    a: String,
    /// Packing degrees (comma list).
    #[arg(long, default_value = "0")]
    d: String,
    /// Grid sample count for the load-averaged summary.
    #[arg(long, default_value_t = 48_000, value_parser = clap::value_parser!(u32).range(1..))]
    samples: u32,
    /// Report blocking 1 instead of an error when the load exceeds capacity.
    #[arg(long)]
    clamp_overload: bool,
    /// Write the sweep CSV here (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct MontecarloArgs {
    /// JSON config file; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin scenario: 1..5 or `all`. Mutually exclusive with --e/--f.
    #[arg(long, conflicts_with_all = ["e", "f"])]
    case: Option<String>,
    /// Custom sizing: line chassis count (E).
    #[arg(long, requires = "f")]
    e: Option<u32>,
    /// Custom sizing: add/drop chassis count (F).
    #[arg(long, requires = "e")]
    f: Option<u32>,
    /// Line cards per chassis (N).
    #[arg(long)]
    n: Option<u32>,
    /// Interconnect chassis count (M).
    #[arg(long)]
    m: Option<u32>,
    /// Independent connectivity maps per case.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    maps: Option<u32>,
    /// Requests per map: a count, or `auto` for load-scaled sizing.
    #[arg(long)]
    connections: Option<String>,
    /// Wavelength count of the grid.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    wavelengths: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Interconnect wiring: `proposed` or `random`.
    #[arg(long)]
    pattern: Option<String>,
    /// Fill factor used by `--connections auto`.
    #[arg(long)]
    fill: Option<f64>,
    /// Write the scenario CSV here (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum EonCommand {
    /// Print the built-in spectral-width table (GHz per flow bitrate).
    Table2(Table2Args),
    /// Compare carried traffic: elastic new-design vs fixed 50 GHz grid.
    Compare(CompareArgs),
}

#[derive(Args)]
struct Table2Args {
    /// Write the CSV here (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    /// Routers in the reference network (complete graph).
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(2..))]
    routers: u32,
    /// Demands per seed.
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u32).range(1..))]
    demands: u32,
    /// Seeds: a single value, a comma list, or an inclusive range `1..20`.
    #[arg(long, default_value = "1..20")]
    seeds: String,
    /// Slots per link.
    #[arg(long, default_value_t = DEFAULT_GRID_SLOTS)]
    slots: usize,
    /// Write the comparison CSV here (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Manifest embedded in every report; the `config` field is the fully
/// resolved configuration and can be replayed through `--config`.
#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    command: String,
    version: String,
    rng: String,
    config: serde_json::Value,
    outputs: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<String>,
}

impl RunManifest {
    fn new(command: &str, config: serde_json::Value, out: &Option<PathBuf>) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: RNG_ALGORITHM.to_string(),
            config,
            outputs: out
                .iter()
                .map(|p| p.to_string_lossy().into_owned())
                .collect(),
            timestamp: None,
        }
    }

    fn comment_header(&self) -> String {
        format!(
            "# manifest: {}\n",
            serde_json::to_string(self).expect("manifest serializes")
        )
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn runtime(err: impl std::fmt::Display) -> Self {
        CliError::Runtime(err.to_string())
    }
}

fn emit(out: &Option<PathBuf>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn parse_f64_list(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |s: &str| CliError::Usage(format!("cannot parse number '{s}'"));
    if let Some((start, rest)) = spec.split_once(':') {
        let (end, step) = rest
            .split_once(':')
            .ok_or_else(|| CliError::Usage(format!("range '{spec}' must be start:end:step")))?;
        let start: f64 = start.parse().map_err(|_| bad(start))?;
        let end: f64 = end.parse().map_err(|_| bad(end))?;
        let step: f64 = step.parse().map_err(|_| bad(step))?;
        if step <= 0.0 || end < start {
            return Err(CliError::Usage(format!(
                "range '{spec}' must have positive step and end >= start"
            )));
        }
        let count = ((end - start) / step).round() as usize;
        let mut values: Vec<f64> = (0..=count).map(|i| start + step * i as f64).collect();
        if let Some(last) = values.last_mut() {
            if (*last - end).abs() < step * 1e-9 {
                *last = end;
            }
        }
        values.retain(|v| *v <= end + step * 1e-9);
        Ok(values)
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|_| bad(s)))
            .collect()
    }
}

fn parse_u32_list(spec: &str) -> Result<Vec<u32>, CliError> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| CliError::Usage(format!("cannot parse count '{s}'")))
        })
        .collect()
}

fn parse_seed_list(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = |s: &str| CliError::Usage(format!("cannot parse seed '{s}'"));
    if let Some((start, end)) = spec.split_once("..") {
        let start: u64 = start.parse().map_err(|_| bad(start))?;
        let end: u64 = end.parse().map_err(|_| bad(end))?;
        if end < start {
            return Err(CliError::Usage(format!("seed range '{spec}' is empty")));
        }
        Ok((start..=end).collect())
    } else {
        spec.split(',')
            .map(|s| s.trim().parse::<u64>().map_err(|_| bad(s)))
            .collect()
    }
}

fn cmd_analytic(args: &AnalyticArgs) -> Result<(), CliError> {
    let loads = parse_f64_list(&args.a)?;
    let d_values = parse_u32_list(&args.d)?;
    let table = analytic_sweep(args.n, args.m, &loads, &d_values, args.clamp_overload);

    let config = serde_json::json!({
        "n": args.n,
        "m": args.m,
        "a": args.a,
        "d": args.d,
        "samples": args.samples,
        "clamp_overload": args.clamp_overload,
    });
    let manifest = RunManifest::new("analytic", config, &args.out);
    let csv = format!("{}{}", manifest.comment_header(), table.to_csv());
    emit(&args.out, &csv)?;

    // Load-averaged summary per packing degree, uniform per-degree weights.
    let mut summary = String::new();
    for &d in &d_values {
        match load_averaged_blocking(args.n, args.m, d, &[1.0], args.samples) {
            Ok(value) => {
                let _ = writeln!(summary, "load_averaged_blocking d={d}: {value}");
            }
            Err(err) => return Err(CliError::runtime(format!("d={d}: {err}"))),
        }
    }
    eprint!("{summary}");
    Ok(())
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MontecarloFileConfig {
    case: Option<String>,
    e: Option<u32>,
    f: Option<u32>,
    n: Option<u32>,
    m: Option<u32>,
    maps: Option<u32>,
    connections: Option<String>,
    wavelengths: Option<u32>,
    seed: Option<u64>,
    pattern: Option<String>,
    fill: Option<f64>,
}

fn load_file_config(path: &Path) -> Result<MontecarloFileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not valid JSON: {e}", path.display())))?;
    // Accept a previously emitted manifest as-is.
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    serde_json::from_value(value)
        .map_err(|e| CliError::Usage(format!("{}: unsupported config: {e}", path.display())))
}

struct ResolvedMontecarlo {
    case: Option<String>,
    custom: Option<(u32, u32)>,
    n: u32,
    m: u32,
    maps: u32,
    connections: String,
    wavelengths: u32,
    seed: u64,
    pattern: InterconnectPattern,
    fill: f64,
}

fn resolve_montecarlo(args: &MontecarloArgs) -> Result<ResolvedMontecarlo, CliError> {
    let file = match &args.config {
        Some(path) => load_file_config(path)?,
        None => MontecarloFileConfig::default(),
    };
    let case = args.case.clone().or(file.case);
    let e = args.e.or(file.e);
    let f = args.f.or(file.f);
    let custom = match (e, f) {
        (Some(e), Some(f)) => Some((e, f)),
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "custom sizing needs both e and f".to_string(),
            ))
        }
    };
    if case.is_some() && custom.is_some() {
        return Err(CliError::Usage(
            "choose either --case or a custom --e/--f sizing, not both".to_string(),
        ));
    }
    let pattern_name = args
        .pattern
        .clone()
        .or(file.pattern)
        .unwrap_or_else(|| "proposed".to_string());
    let seed = args.seed.or(file.seed).unwrap_or(1);
    let pattern = match pattern_name.as_str() {
        "proposed" => InterconnectPattern::Proposed,
        "random" => InterconnectPattern::Random { seed },
        other => {
            return Err(CliError::Usage(format!(
                "unknown pattern '{other}' (expected proposed or random)"
            )))
        }
    };
    Ok(ResolvedMontecarlo {
        case,
        custom,
        n: args.n.or(file.n).unwrap_or(14),
        m: args.m.or(file.m).unwrap_or(16),
        maps: args.maps.or(file.maps).unwrap_or(1),
        connections: args
            .connections
            .clone()
            .or(file.connections)
            .unwrap_or_else(|| "auto".to_string()),
        wavelengths: args.wavelengths.or(file.wavelengths).unwrap_or(320),
        seed,
        pattern,
        fill: args.fill.or(file.fill).unwrap_or(DEFAULT_FILL),
    })
}

fn cmd_montecarlo(args: &MontecarloArgs) -> Result<(), CliError> {
    let resolved = resolve_montecarlo(args)?;
    let base_sim = SimConfig {
        connections_per_map: 0, // set below
        wavelengths: resolved.wavelengths,
        maps: resolved.maps,
        seed: resolved.seed,
        pattern: resolved.pattern,
        ..SimConfig::default()
    };
    let auto = resolved.connections == "auto";
    let explicit = if auto {
        None
    } else {
        Some(resolved.connections.parse::<u32>().map_err(|_| {
            CliError::Usage(format!(
                "--connections must be a count or 'auto' (got '{}')",
                resolved.connections
            ))
        })?)
    };
    if explicit == Some(0) {
        return Err(CliError::Usage(
            "--connections must be at least 1".to_string(),
        ));
    }

    let make_case = |label: String, cluster: ClusterConfig| -> ScenarioCase {
        let sim = match explicit {
            Some(connections) => SimConfig {
                connections_per_map: connections,
                ..base_sim
            },
            None => base_sim.with_scaled_load(&cluster, resolved.fill),
        };
        ScenarioCase {
            label,
            cluster,
            sim,
        }
    };

    let cases: Vec<ScenarioCase> = match (&resolved.case, resolved.custom) {
        (Some(case), None) => {
            let fill = if auto { Some(resolved.fill) } else { None };
            let all = builtin_scenarios(
                SimConfig {
                    connections_per_map: explicit.unwrap_or(48_000),
                    ..base_sim
                },
                fill,
            );
            match case.as_str() {
                "all" => all,
                number => {
                    let index: usize = number
                        .parse()
                        .ok()
                        .filter(|i| (1..=all.len()).contains(i))
                        .ok_or_else(|| {
                            CliError::Usage(format!(
                                "unknown case '{number}' (expected 1..{} or all)",
                                all.len()
                            ))
                        })?;
                    vec![all[index - 1].clone()]
                }
            }
        }
        (None, custom) => {
            let (e, f) = custom.unwrap_or((8, 8));
            let cluster = ClusterConfig::new(resolved.n, resolved.m, e, f)
                .map_err(|err| CliError::Usage(err.to_string()))?;
            if classify_nonblocking(resolved.n, resolved.m) == NonblockingClass::Blocking {
                return Err(CliError::Runtime(format!(
                    "sizing is blocking: m={} < n={}",
                    resolved.m, resolved.n
                )));
            }
            for warning in validate_sizing(&cluster) {
                eprintln!("warning: {warning}");
            }
            vec![make_case("custom".to_string(), cluster)]
        }
        (Some(_), Some(_)) => unreachable!("rejected in resolve_montecarlo"),
    };

    let report = run_scenarios(&cases);
    for row in &report.rows {
        if let Err(err) = &row.outcome {
            eprintln!("warning: {}: {err}", row.label);
        }
    }

    let config = serde_json::json!({
        "case": resolved.case,
        "e": resolved.custom.map(|c| c.0),
        "f": resolved.custom.map(|c| c.1),
        "n": resolved.n,
        "m": resolved.m,
        "maps": resolved.maps,
        "connections": resolved.connections,
        "wavelengths": resolved.wavelengths,
        "seed": resolved.seed,
        "pattern": match resolved.pattern {
            InterconnectPattern::Proposed => "proposed",
            InterconnectPattern::Random { .. } => "random",
        },
        "fill": resolved.fill,
    });
    let manifest = RunManifest::new("montecarlo", config, &args.out);
    let csv = format!("{}{}", manifest.comment_header(), report.to_csv());
    emit(&args.out, &csv)
}

fn cmd_eon_table2(args: &Table2Args) -> Result<(), CliError> {
    let manifest = RunManifest::new("eon table2", serde_json::json!({}), &args.out);
    let csv = format!("{}{}", manifest.comment_header(), width_table_csv());
    emit(&args.out, &csv)
}

fn cmd_eon_compare(args: &CompareArgs) -> Result<(), CliError> {
    let seeds = parse_seed_list(&args.seeds)?;
    let report = compare_approaches(args.routers, args.demands as usize, args.slots, &seeds)
        .map_err(CliError::runtime)?;

    let config = serde_json::json!({
        "routers": args.routers,
        "demands": args.demands,
        "seeds": args.seeds,
        "slots": args.slots,
    });
    let manifest = RunManifest::new("eon compare", config, &args.out);
    let csv = format!("{}{}", manifest.comment_header(), report.to_csv());
    emit(&args.out, &csv)?;
    eprintln!(
        "carried ratio over {} seeds: mean {} (min {}, max {})",
        report.rows.len(),
        report.mean_ratio,
        report.min_ratio,
        report.max_ratio
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analytic(args) => cmd_analytic(args),
        Command::Montecarlo(args) => cmd_montecarlo(args),
        Command::Eon(EonCommand::Table2(args)) => cmd_eon_table2(args),
        Command::Eon(EonCommand::Compare(args)) => cmd_eon_compare(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}
