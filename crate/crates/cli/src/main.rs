//! `manyminds`: runs scenarios, the invariant suite, Markov ensembles,
//! successor enumeration and manifestation checks. Exit status 0 means
//! every check passed, 1 that a check failed, 2 that the input was bad.

mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use manyminds::geometry::check_manifestation;
use manyminds::io::{parse_geometry, parse_model, parse_real_list, parse_structure};
use manyminds::process::{run_trajectories, Variant, DEFAULT_MAX_STEPS};
use manyminds::scenarios::{run_scenario, ScenarioReport, SCENARIOS, SCHEMA_VERSION};
use manyminds::structures::{immediate_successors, successor_counts, validate, DocketAlphabet, LinkSet, SwitchingStructure};
use manyminds::verify::{invariant_names, verify, DEFAULT_VERIFY_SEED};
use serde::Serialize;
use serde_json::{json, Value};

use config::{read_input, Common, Format, RunConfig};

/// Default number of sampled trajectories for `simulate`.
const DEFAULT_TRAJECTORIES: u64 = 10_000;
/// Replay residual above which a simulation is reported as failed.
const REPLAY_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "manyminds", version, about = "Many-minds switching structures at desk scale")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a worked model and its identity checks.
    Scenario(ScenarioArgs),
    /// Run every module's invariant suite with fixed seeds.
    Verify {
        /// Add a failing check to the named invariant (for testing the
        /// failure path).
        #[arg(long, value_name = "INVARIANT")]
        inject_fault: Option<String>,
        /// Print invariant names and exit.
        #[arg(long)]
        list: bool,
    },
    /// Sample trajectories of the Markov process over a model file.
    Simulate { file: PathBuf },
    #[command(subcommand)]
    Structures(StructuresCommand),
    #[command(subcommand)]
    Geometry(GeometryCommand),
}

#[derive(clap::Args)]
struct ScenarioArgs {
    /// Scenario name, or `all`.
    name: String,
    /// Comma-separated weights.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// History length (cosmology).
    #[arg(long)]
    t: Option<usize>,
    /// Largest copy count (frequency).
    #[arg(long)]
    n_max: Option<usize>,
    /// Observation steps (glance).
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    multiplicity_a: Option<u64>,
    #[arg(long)]
    multiplicity_b: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
    #[value(name = "C", alias = "c")]
    C,
}

#[derive(Subcommand)]
enum StructuresCommand {
    /// Count the successors of a structure (the minimal one by default).
    Enum {
        file: Option<PathBuf>,
        /// Links allowed between a new determination and existing ones.
        #[arg(long, value_enum, default_value = "any")]
        cross: Links,
        /// Links allowed among the determinations of a new switch.
        #[arg(long, value_enum, default_value = "any")]
        fresh: Links,
        /// Also list the immediate successors.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Subcommand)]
enum GeometryCommand {
    /// Check a manifestation clause by clause.
    Check { file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Links {
    Any,
    Ordered,
    Spacelike,
}

impl Links {
    fn set(self) -> LinkSet {
        match self {
            Links::Any => LinkSet::ANY,
            Links::Ordered => LinkSet::ORDERED,
            Links::Spacelike => LinkSet::SPACELIKE,
        }
    }
}

/// Why a command did not succeed, with its exit status.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<manyminds::Error> for Failure {
    fn from(e: manyminds::Error) -> Self {
        Failure::input(e.to_string())
    }
}

/// A report in both output shapes.
struct Output {
    json: Value,
    csv: (Vec<&'static str>, Vec<Vec<String>>),
    pass: bool,
}

fn write_bytes(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, bytes).map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes).and_then(|_| so.flush()).map_err(|e| Failure::input(e.to_string()))
        }
    }
}

fn render(cfg: &RunConfig, out: &Output) -> Result<Vec<u8>, Failure> {
    match cfg.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out.json).map_err(|e| Failure::input(e.to_string()))?;
            s.push('\n');
            Ok(s.into_bytes())
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let werr = |e: csv::Error| Failure::input(e.to_string());
            w.write_record(&out.csv.0).map_err(werr)?;
            for row in &out.csv.1 {
                w.write_record(row).map_err(werr)?;
            }
            w.into_inner().map_err(|e| Failure::input(e.to_string()))
        }
    }
}

fn check_rows(report: &ScenarioReport) -> Vec<Vec<String>> {
    report
        .checks
        .iter()
        .flat_map(|(group, checks)| {
            checks.iter().map(move |c| {
                vec![
                    report.scenario.clone(),
                    group.clone(),
                    c.label.clone(),
                    format!("{:?}", c.kind),
                    c.computed.to_string(),
                    c.expected.to_string(),
                    c.tol.to_string(),
                    c.pass.to_string(),
                ]
            })
        })
        .collect()
}

const CHECK_HEADER: [&str; 8] = ["scenario", "identity", "label", "kind", "computed", "expected", "tol", "pass"];

fn cmd_scenario(args: &ScenarioArgs, cfg: &RunConfig) -> Result<Output, Failure> {
    let mut params = cfg.params.clone();
    if let Some(p) = &args.p {
        params.p = Some(parse_real_list(p)?);
    }
    params.q = args.q.or(params.q);
    params.x = args.x.or(params.x);
    params.t = args.t.or(params.t);
    params.n_max = args.n_max.or(params.n_max);
    params.steps = args.steps.or(params.steps);
    params.multiplicity_a = args.multiplicity_a.or(params.multiplicity_a);
    params.multiplicity_b = args.multiplicity_b.or(params.multiplicity_b);
    if let Some(v) = args.variant {
        params.variant = Some(match v {
            VariantArg::A => Variant::A,
            VariantArg::B => Variant::B,
            VariantArg::C => Variant::C,
        });
    }
    params.seed = cfg.seed.or(params.seed);
    params.trials = cfg.trajectories.or(params.trials);

    let names: Vec<&str> = if args.name == "all" { SCENARIOS.to_vec() } else { vec![args.name.as_str()] };
    let mut reports = Vec::new();
    for name in names {
        let report = run_scenario(name, &params, &cfg.tol)?;
        let failed = report.failures().len();
        let total: usize = report.checks.values().map(Vec::len).sum();
        eprintln!("scenario {name}: {total} checks, {failed} failed");
        for (group, c) in report.failures().iter().take(10) {
            eprintln!("  {group}: {} computed {} expected {}", c.label, c.computed, c.expected);
        }
        reports.push(report);
    }
    let pass = reports.iter().all(|r| r.pass);
    let rows = reports.iter().flat_map(check_rows).collect();
    let json = if reports.len() == 1 {
        serde_json::to_value(&reports[0])
    } else {
        serde_json::to_value(json!({
            "schema_version": SCHEMA_VERSION,
            "reports": reports,
            "pass": pass,
        }))
    }
    .map_err(|e| Failure::input(e.to_string()))?;
    Ok(Output {
        json,
        csv: (CHECK_HEADER.to_vec(), rows),
        pass,
    })
}

fn cmd_verify(cfg: &RunConfig, fault: Option<&str>) -> Result<Output, Failure> {
    let seed = cfg.seed.unwrap_or(DEFAULT_VERIFY_SEED);
    let report = verify(seed, &cfg.tol, fault)?;
    print!("{}", report.table());
    for f in report.failures() {
        match (&f.error, &f.first_failure) {
            (Some(e), _) => eprintln!("invariant {} failed: {e}", f.name),
            (None, Some(c)) => eprintln!(
                "invariant {} failed: {} computed {} expected {} (tol {})",
                f.name, c.label, c.computed, c.expected, c.tol
            ),
            (None, None) => eprintln!("invariant {} failed", f.name),
        }
    }
    let rows = report
        .invariants
        .iter()
        .map(|i| {
            vec![
                i.name.clone(),
                i.checks.to_string(),
                i.failed.to_string(),
                i.max_deviation.to_string(),
                i.pass.to_string(),
            ]
        })
        .collect();
    Ok(Output {
        json: serde_json::to_value(&report).map_err(|e| Failure::input(e.to_string()))?,
        csv: (vec!["invariant", "checks", "failed", "max_deviation", "pass"], rows),
        pass: report.pass,
    })
}

fn cmd_simulate(file: &Path, cfg: &RunConfig) -> Result<Output, Failure> {
    let model = parse_model(&read_input(file)?).map_err(|e| Failure::input(format!("{}: {e}", file.display())))?;
    let seed = cfg.seed.unwrap_or(manyminds::scenarios::DEFAULT_SEED);
    let count = cfg.trajectories.unwrap_or(DEFAULT_TRAJECTORIES);
    let max_steps = cfg.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
    let keep = cfg.format == Format::Csv;
    let (ensemble, trajectories) = run_trajectories(model.initial(), &model, count, max_steps, seed, keep)?;

    let worst_total = ensemble
        .jump_tables
        .0
        .values()
        .flatten()
        .map(|d| (d.total() - 1.0).abs())
        .fold(0.0, f64::max);
    let pass = ensemble.max_replay_residual <= REPLAY_TOL && worst_total <= 1e-12;
    eprintln!(
        "simulate: {count} trajectories, extinction rate {}, {} alive, {} at the step limit",
        ensemble.extinction_rate, ensemble.alive, ensemble.step_limit
    );
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "model": file.display().to_string(),
        "initial": model.initial(),
        "nodes": model.values(),
        "ensemble": ensemble,
        "checks": {
            "max_replay_residual": ensemble.max_replay_residual,
            "max_jump_total_error": worst_total,
        },
        "pass": pass,
    });
    let mut rows = Vec::new();
    for t in &trajectories {
        for (k, s) in t.steps.iter().enumerate() {
            rows.push(vec![
                t.index.to_string(),
                (k + 1).to_string(),
                s.from.clone(),
                s.to.clone().unwrap_or_default(),
                s.probability.to_string(),
            ]);
        }
    }
    Ok(Output {
        json,
        csv: (vec!["trajectory", "step", "structure", "successor", "probability"], rows),
        pass,
    })
}

fn cmd_structures_enum(
    file: Option<&Path>,
    cross: Links,
    fresh: Links,
    list: bool,
) -> Result<Output, Failure> {
    let s = match file {
        Some(p) => parse_structure(&read_input(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?,
        None => SwitchingStructure::minimal(),
    };
    let validation = validate(&s);
    if !validation.is_valid() {
        return Err(Failure::input(format!("structure is not valid: {validation}")));
    }
    let alphabet = DocketAlphabet {
        cross: cross.set(),
        fresh: fresh.set(),
    };
    let counts = successor_counts(&s, &alphabet);
    eprintln!("structures enum: {} immediate successors", counts.immediate);
    let mut rows = vec![
        vec!["b1".to_string(), counts.b1.to_string()],
        vec!["b2".to_string(), counts.b2.to_string()],
        vec!["immediate".to_string(), counts.immediate.to_string()],
    ];
    rows.extend(counts.by_size.iter().map(|(k, v)| vec![k.clone(), v.to_string()]));
    let mut json = json!({
        "schema_version": SCHEMA_VERSION,
        "structure": s,
        "alphabet": { "cross": cross, "fresh": fresh },
        "counts": counts,
    });
    if list {
        let succ: Vec<Value> = immediate_successors(&s, &alphabet)
            .into_iter()
            .map(|c| json!(c.into_structure()))
            .collect();
        json["successors"] = Value::Array(succ);
    }
    Ok(Output {
        json,
        csv: (vec!["count", "value"], rows),
        pass: true,
    })
}

fn cmd_geometry_check(file: &Path) -> Result<Output, Failure> {
    let (m, s) = parse_geometry(&read_input(file)?).map_err(|e| Failure::input(format!("{}: {e}", file.display())))?;
    let report = check_manifestation(&m, &s);
    for c in &report.clauses {
        eprintln!("{:<4} {:?} {}", c.clause, c.status, c.detail);
    }
    let rows = report
        .clauses
        .iter()
        .map(|c| vec![c.clause.clone(), format!("{:?}", c.status).to_lowercase(), c.detail.clone()])
        .collect();
    let pass = report.pass;
    let json = json!({
        "schema_version": SCHEMA_VERSION,
        "report": report,
        "pass": pass,
    });
    Ok(Output {
        json,
        csv: (vec!["clause", "status", "detail"], rows),
        pass,
    })
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Output, Failure> {
    match &cli.command {
        Command::Scenario(args) => cmd_scenario(args, cfg),
        Command::Verify { inject_fault, .. } => cmd_verify(cfg, inject_fault.as_deref()),
        Command::Simulate { file } => cmd_simulate(file, cfg),
        Command::Structures(StructuresCommand::Enum {
            file,
            cross,
            fresh,
            list,
        }) => cmd_structures_enum(file.as_deref(), *cross, *fresh, *list),
        Command::Geometry(GeometryCommand::Check { file }) => cmd_geometry_check(file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Verify { list: true, .. } = cli.command {
        for n in invariant_names() {
            println!("{n}");
        }
        return ExitCode::SUCCESS;
    }
    let cfg = match RunConfig::resolve(&cli.common) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    // `verify` prints its table on standard output, so its report only
    // goes to a file.
    let is_verify = matches!(cli.command, Command::Verify { .. });
    let result = run(&cli, &cfg).and_then(|out| {
        if !(is_verify && cfg.out.is_none()) {
            write_bytes(cfg.out.as_deref(), &render(&cfg, &out)?)?;
        }
        Ok(out.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message);
            let mut body = BTreeMap::new();
            body.insert("schema_version", json!(SCHEMA_VERSION));
            body.insert("error", json!(f.message));
            body.insert("pass", json!(false));
            if cfg.format == Format::Json && !is_verify {
                let text = serde_json::to_string_pretty(&body).unwrap_or_default() + "\n";
                let _ = write_bytes(cfg.out.as_deref(), text.as_bytes());
            }
            ExitCode::from(f.code)
        }
    }
}
