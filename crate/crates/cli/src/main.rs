//! `wsn-sim`: run one lifetime simulation, sweep the scenario/dimension
//! matrix over seeds, or exercise the built-in invariant checks.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use wsn_sim::{
    default_scenario, init_simulation, metrics, run_simulation, threshold_distance, EnergyParams,
    FieldGeometry, LifetimeSummary, ScenarioPatch, ScenarioSpec, Variant,
};

#[derive(Parser)]
#[command(name = "wsn-sim", version, about = "Sensor-network lifetime simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its per-round CSV.
    Run(RunArgs),
    /// Run the scenario x dimension matrix over consecutive seeds.
    Sweep(SweepArgs),
    /// Run the built-in invariant suite and report pass/fail.
    Check,
}

#[derive(Args)]
struct RunArgs {
    /// Protocol variant: static|ms1|ms2|ms3|ms4|pms2|pms4
    #[arg(long)]
    scenario: String,
    /// Square field edge length in meters.
    #[arg(long)]
    dim: f64,
    /// Seed for node placement and election draws.
    #[arg(long)]
    seed: u64,
    /// Round cap (default 3000).
    #[arg(long)]
    rounds: Option<u32>,
    /// Node count (default 100).
    #[arg(long)]
    nodes: Option<u32>,
    /// JSON config file; explicit flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated field dimensions in meters.
    #[arg(long, default_value = "200,250,350,450")]
    dims: String,
    /// Comma-separated variants, or "all".
    #[arg(long, default_value = "all")]
    scenarios: String,
    /// Number of consecutive seeds (1..=N) per cell.
    #[arg(long, default_value_t = 21)]
    seeds: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Usage or config problem: exit 1. Anything failing mid-flight: exit 2.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    fn report(self) -> ExitCode {
        match self {
            CliError::Usage(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
            CliError::Runtime(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    let _ = err.print();
                    ExitCode::from(1)
                }
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Check => return cmd_check(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => err.report(),
    }
}

fn parse_variant(s: &str) -> Result<Variant, CliError> {
    Variant::parse(s).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown scenario {s:?} (expected static|ms1|ms2|ms3|ms4|pms2|pms4)"
        ))
    })
}

/// Defaults, then the config file, then explicit flags.
fn resolve_spec(args: &RunArgs) -> Result<ScenarioSpec, CliError> {
    let variant = parse_variant(&args.scenario)?;
    let base = default_scenario(variant, args.dim, args.seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            let patch =
                ScenarioPatch::from_json(&text).map_err(|e| CliError::Usage(e.to_string()))?;
            patch
                .apply(&base)
                .map_err(|e| CliError::Usage(e.to_string()))?
        }
        None => base,
    };
    spec.variant = variant;
    spec.field = FieldGeometry::square(args.dim);
    spec.rng_seed = args.seed;
    if let Some(rounds) = args.rounds {
        spec.max_rounds = rounds;
    }
    if let Some(nodes) = args.nodes {
        spec.num_nodes = nodes;
    }
    spec.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}

fn format_dim(dim: f64) -> String {
    if dim.fract() == 0.0 {
        format!("{dim:.0}")
    } else {
        format!("{dim}")
    }
}

fn run_csv_path(out: &Path, variant: Variant, dim: f64, seed: u64) -> PathBuf {
    out.join(format!("{variant}_{}_{seed}.csv", format_dim(dim)))
}

fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let spec = resolve_spec(&args)?;
    std::fs::create_dir_all(&args.out).map_err(|e| {
        CliError::Runtime(format!("cannot create out dir {}: {e}", args.out.display()))
    })?;
    let records = run_simulation(&spec);
    let summary = LifetimeSummary::from_records(
        &records,
        spec.variant,
        spec.field.xm,
        spec.rng_seed,
        spec.num_nodes,
    );
    let path = run_csv_path(&args.out, spec.variant, spec.field.xm, spec.rng_seed);
    metrics::write_round_csv(&records, &path).map_err(|e| CliError::Runtime(e.to_string()))?;
    let fmt = |v: Option<u32>| v.map_or("-".to_string(), |r| r.to_string());
    println!(
        "{} dim {} seed {}: rounds {}, first_dead {}, quarter_dead {}, last_alive {} -> {}",
        spec.variant,
        format_dim(spec.field.xm),
        spec.rng_seed,
        records.len(),
        fmt(summary.first_dead_round),
        fmt(summary.quarter_dead_round),
        summary.last_alive_round,
        path.display()
    );
    Ok(())
}

fn parse_dims(text: &str) -> Result<Vec<f64>, CliError> {
    let mut dims = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let dim: f64 = part
            .parse()
            .map_err(|_| CliError::Usage(format!("bad dimension {part:?}")))?;
        if !(dim > 0.0 && dim.is_finite()) {
            return Err(CliError::Usage(format!(
                "dimension must be positive ({part})"
            )));
        }
        dims.push(dim);
    }
    Ok(dims)
}

fn parse_scenarios(text: &str) -> Result<Vec<Variant>, CliError> {
    if text.trim().eq_ignore_ascii_case("all") {
        return Ok(Variant::ALL.to_vec());
    }
    text.split(',').map(|s| parse_variant(s.trim())).collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let dims = parse_dims(&args.dims)?;
    let scenarios = parse_scenarios(&args.scenarios)?;
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds must be at least 1".into()));
    }
    std::fs::create_dir_all(&args.out).map_err(|e| {
        CliError::Runtime(format!("cannot create out dir {}: {e}", args.out.display()))
    })?;

    let mut cells: Vec<(Variant, f64)> = Vec::new();
    for &variant in &scenarios {
        for &dim in &dims {
            cells.push((variant, dim));
        }
    }
    let runs: Vec<(Variant, f64, u64)> = cells
        .iter()
        .flat_map(|&(v, d)| (1..=args.seeds).map(move |s| (v, d, s)))
        .collect();

    // Independent seeded runs; each writes exactly one file.
    let results: Vec<Result<LifetimeSummary, String>> = runs
        .par_iter()
        .map(|&(variant, dim, seed)| {
            let spec = default_scenario(variant, dim, seed).map_err(|e| e.to_string())?;
            let records = run_simulation(&spec);
            let path = run_csv_path(&args.out, variant, dim, seed);
            metrics::write_round_csv(&records, &path).map_err(|e| e.to_string())?;
            Ok(LifetimeSummary::from_records(
                &records,
                variant,
                dim,
                seed,
                spec.num_nodes,
            ))
        })
        .collect();

    let mut summaries = Vec::with_capacity(results.len());
    for r in results {
        summaries.push(r.map_err(CliError::Runtime)?);
    }

    let mut table: BTreeMap<String, BTreeMap<String, metrics::ReplicateAggregate>> =
        BTreeMap::new();
    for &(variant, dim) in &cells {
        let cell: Vec<LifetimeSummary> = summaries
            .iter()
            .filter(|s| s.scenario == variant && s.dim == dim)
            .copied()
            .collect();
        let agg =
            metrics::summarize_replicates(&cell).map_err(|e| CliError::Runtime(e.to_string()))?;
        table
            .entry(variant.to_string())
            .or_default()
            .insert(format_dim(dim), agg);
    }
    let summary_path = args.out.join("summary.json");
    let json = serde_json::to_string_pretty(&table)
        .map_err(|e| CliError::Runtime(format!("summary serialization: {e}")))?;
    std::fs::write(&summary_path, json)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", summary_path.display())))?;
    println!(
        "swept {} runs over {} cells -> {}",
        runs.len(),
        cells.len(),
        summary_path.display()
    );
    Ok(())
}

fn cmd_check() -> ExitCode {
    let mut all_ok = true;
    let mut report = |name: &str, outcome: Result<(), String>| match outcome {
        Ok(()) => println!("PASS {name}"),
        Err(detail) => {
            println!("FAIL {name}: {detail}");
            all_ok = false;
        }
    };

    report("crossover-continuity", check_crossover());
    report("energy-conservation", check_conservation());
    report("determinism", check_determinism());
    report("monotonicity", check_monotonicity());

    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn check_crossover() -> Result<(), String> {
    let p = EnergyParams::default();
    let d0 = threshold_distance(&p);
    if (d0 - 87.7058).abs() > 0.001 {
        return Err(format!("threshold distance {d0} not near 87.7058"));
    }
    for bits in [1u64, 4000, 1_000_000] {
        let b = bits as f64;
        let fs = b * p.e_elec_tx + b * p.e_fs * d0 * d0;
        let mp = b * p.e_elec_tx + b * p.e_amp * d0 * d0 * d0 * d0;
        let rel = (fs - mp).abs() / fs;
        if rel > 1e-15 {
            return Err(format!("branch gap {rel} at {bits} bits"));
        }
    }
    Ok(())
}

fn check_conservation() -> Result<(), String> {
    for variant in Variant::ALL {
        let spec = default_scenario(variant, 200.0, 1).map_err(|e| e.to_string())?;
        let budget = spec.num_nodes as f64 * spec.energy.e0;
        let mut state = init_simulation(&spec);
        for _ in 0..spec.max_rounds {
            state.run_round();
            let book = state.residual_total_raw() + state.charged_total();
            if (book - budget).abs() > 1e-9 * budget {
                return Err(format!(
                    "{variant} round {}: {book} != {budget}",
                    state.round()
                ));
            }
            if state.alive_count() == 0 {
                break;
            }
        }
    }
    Ok(())
}

fn check_determinism() -> Result<(), String> {
    let spec = default_scenario(Variant::Pms2, 450.0, 7).map_err(|e| e.to_string())?;
    let a = metrics::round_csv_string(&run_simulation(&spec));
    let b = metrics::round_csv_string(&run_simulation(&spec));
    if a == b {
        Ok(())
    } else {
        Err("two runs of the same spec differ".into())
    }
}

fn check_monotonicity() -> Result<(), String> {
    for variant in [Variant::Static, Variant::Ms2, Variant::Pms4] {
        let spec = default_scenario(variant, 350.0, 3).map_err(|e| e.to_string())?;
        let records = run_simulation(&spec);
        for pair in records.windows(2) {
            if pair[1].alive > pair[0].alive {
                return Err(format!(
                    "{variant}: alive count rose at round {}",
                    pair[1].round
                ));
            }
            if pair[1].total_residual_j > pair[0].total_residual_j + 1e-12 {
                return Err(format!(
                    "{variant}: residual rose at round {}",
                    pair[1].round
                ));
            }
        }
    }
    Ok(())
}
