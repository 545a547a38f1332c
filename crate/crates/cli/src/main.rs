use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use finsler_core::curvature::{default_nodes, evaluate_batch, Quantity, Record};
use finsler_core::error::Error;
use finsler_core::metrics::{validate_norm, MetricSpec, HOMOGENEITY_TOL};
use finsler_core::sampling::SamplePlan;
use finsler_core::tolerances;
use finsler_core::verify::{
    classify, run_target, ClassifyPlan, Thresholds, VerifyOptions, VerifyTarget, MIN_DIRECTIONS,
    MIN_POINTS,
};
use serde_json::{json, Value};

mod config;
mod output;

use config::{Format, RunConfig, RunSettings};

#[derive(Parser)]
#[command(
    name = "finsler",
    version,
    about = "Numerical checks for Finsler metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan the norm axioms at sample points.
    Validate(Common),
    /// Tabulate curvature quantities over a sample grid.
    Curvature {
        #[command(flatten)]
        common: Common,
        /// Comma list from g, C, I, G, berwald, landsberg, sigma, tau, S, or `all`.
        #[arg(long)]
        quantities: Option<String>,
    },
    /// Riemannian / Berwald / Landsberg / S-vanishing verdicts.
    Classify(Common),
    /// Run one named check.
    Verify {
        /// theorem41, theorem42, example33, example34, lemma31, lemma51, lemma81 or prop32.
        target: String,
        #[command(flatten)]
        common: Common,
        /// Linear map for lemma51, e.g. `block-rotation:30deg+flip`.
        #[arg(long)]
        xi: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file with [model], [metric] and [run] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    directions: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Eval(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e.root() {
            Error::Config(_) | Error::Parse { .. } => Failure::Config(e.to_string()),
            _ => Failure::Eval(e),
        }
    }
}

struct Outcome {
    passed: bool,
    summary: String,
    report: Value,
    table: Option<Vec<u8>>,
}

fn load(common: &Common, extra: RunSettings) -> Result<(RunConfig, MetricSpec), Failure> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    cfg.overlay(
        common.model.as_deref(),
        common.metric.as_deref(),
        RunSettings {
            points: common.points,
            directions: common.directions,
            nodes: common.nodes,
            tol: common.tol,
            format: common.format,
            out: common.out.clone(),
            ..extra
        },
    );
    // anything wrong before evaluation starts is a configuration problem
    let spec = cfg.build().map_err(|e| Failure::Config(e.to_string()))?;
    Ok((cfg, spec))
}

fn validate(cfg: &RunConfig, spec: &MetricSpec) -> Result<Outcome, Failure> {
    let points = spec.model.sample_points(cfg.run.points.unwrap_or(5));
    let directions = cfg.run.directions.unwrap_or(64);
    let tol = cfg.run.tol.unwrap_or(HOMOGENEITY_TOL);
    let mut rows = Vec::new();
    for (i, x) in points.iter().enumerate() {
        rows.push(validate_norm(spec, x, directions, tol).map_err(|e| e.at_sample(i))?);
    }
    let passed = rows.iter().all(|r| r.passed());
    let worst = rows
        .iter()
        .min_by(|a, b| {
            a.min_hessian_eigenvalue
                .total_cmp(&b.min_hessian_eigenvalue)
        })
        .expect("at least one point");
    let summary = format!(
        "{spec}: {} at {} points; worst direction {:?} at x = {:?}, min Hessian eigenvalue {:.3e}",
        if passed { "valid" } else { "INVALID" },
        rows.len(),
        worst.worst_direction,
        worst.x,
        worst.min_hessian_eigenvalue
    );
    let report = json!({
        "settings": {"points": points, "directions": directions, "tol": tol},
        "worst": {"x": worst.x, "direction": worst.worst_direction, "min_hessian_eigenvalue": worst.min_hessian_eigenvalue},
        "points": rows,
    });
    Ok(Outcome {
        passed,
        summary,
        report,
        table: None,
    })
}

/// Quantities that vanish identically for a Riemannian metric.
fn vanishes_for_riemannian(q: Quantity) -> bool {
    matches!(
        q,
        Quantity::Cartan
            | Quantity::MeanCartan
            | Quantity::Berwald
            | Quantity::Landsberg
            | Quantity::SCurvature
    )
}

fn column_max(records: &[Record], q: Quantity) -> f64 {
    records
        .iter()
        .filter(|r| r.quantity == q)
        .flat_map(|r| r.value.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

fn curvature(cfg: &RunConfig, spec: &MetricSpec, format: Format) -> Result<Outcome, Failure> {
    let list = cfg.run.quantities.as_deref().unwrap_or("all");
    let quantities = Quantity::parse_list(list)?;
    let points = cfg.run.points.unwrap_or(3);
    let directions = cfg.run.directions.unwrap_or(8);
    let nodes = cfg.run.nodes.unwrap_or_else(|| default_nodes(spec.dim()));
    let plan = SamplePlan::grid(&spec.model, points, directions);
    let records = evaluate_batch(spec, &plan, &quantities, nodes)?;
    let zeroes: Vec<Quantity> = quantities
        .iter()
        .copied()
        .filter(|q| vanishes_for_riemannian(*q))
        .collect();
    let control = if zeroes.is_empty() {
        Vec::new()
    } else {
        evaluate_batch(&spec.riemannian_control(), &plan, &zeroes, nodes)?
    };
    let mut maxima = serde_json::Map::new();
    let mut floors = serde_json::Map::new();
    for q in &quantities {
        maxima.insert(q.name().into(), json!(column_max(&records, *q)));
        if vanishes_for_riemannian(*q) {
            let absolute = if *q == Quantity::SCurvature {
                tolerances::S_FLOOR
            } else {
                tolerances::JET_FLOOR
            };
            floors.insert(
                q.name().into(),
                json!(column_max(&control, *q).max(absolute)),
            );
        }
    }
    let summary = format!(
        "{spec}: {} records over {} samples; column maxima {}",
        records.len(),
        plan.len(),
        Value::Object(maxima.clone())
    );
    let table = (format == Format::Csv).then(|| output::records_csv(&records));
    let report = json!({
        "settings": {"quantities": quantities, "points": points, "directions": directions, "nodes": nodes, "sequence": plan.sequence},
        "column_max": maxima,
        "noise_floor": floors,
        "records": records,
    });
    Ok(Outcome {
        passed: true,
        summary,
        report,
        table,
    })
}

fn run_classify(cfg: &RunConfig, spec: &MetricSpec) -> Result<Outcome, Failure> {
    let points = cfg.run.points.unwrap_or(MIN_POINTS);
    let directions = cfg.run.directions.unwrap_or(MIN_DIRECTIONS);
    if points < MIN_POINTS || directions < MIN_DIRECTIONS {
        return Err(Failure::Config(format!(
            "classify needs at least {MIN_POINTS} points and {MIN_DIRECTIONS} directions"
        )));
    }
    let plan = ClassifyPlan::for_spec(spec, points, directions, cfg.run.nodes);
    let r = classify(spec, &plan, Thresholds::default())?;
    let f = r.flags;
    let summary = format!(
        "{}: riemannian={} berwald={} landsberg={} s_vanishing={}",
        r.metric, f.riemannian, f.berwald, f.landsberg, f.s_vanishing
    );
    Ok(Outcome {
        passed: true,
        summary,
        report: serde_json::to_value(&r).expect("reports serialize"),
        table: None,
    })
}

fn run_verify(cfg: &RunConfig, spec: MetricSpec, target: &str) -> Result<Outcome, Failure> {
    let target: VerifyTarget = target.parse()?;
    let opts = VerifyOptions {
        spec,
        points: cfg.run.points,
        directions: cfg.run.directions,
        nodes: cfg.run.nodes,
        tol: cfg.run.tol,
        xi: cfg.run.xi.clone(),
    };
    let r = run_target(target, &opts)?;
    Ok(Outcome {
        passed: r.passed,
        summary: format!(
            "{target}: {} ({})",
            if r.passed { "PASS" } else { "FAIL" },
            r.summary
        ),
        report: serde_json::to_value(&r).expect("reports serialize"),
        table: None,
    })
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let (name, target, common, extra) = match cli.command {
        Command::Validate(c) => ("validate", None, c, RunSettings::default()),
        Command::Curvature { common, quantities } => (
            "curvature",
            None,
            common,
            RunSettings {
                quantities,
                ..Default::default()
            },
        ),
        Command::Classify(c) => ("classify", None, c, RunSettings::default()),
        Command::Verify { target, common, xi } => (
            "verify",
            Some(target),
            common,
            RunSettings {
                xi,
                ..Default::default()
            },
        ),
    };
    let (cfg, spec) = load(&common, extra)?;
    let format = cfg.run.format.unwrap_or_default();
    let mut outcome = match name {
        "validate" => validate(&cfg, &spec)?,
        "curvature" => curvature(&cfg, &spec, format)?,
        "classify" => run_classify(&cfg, &spec)?,
        _ => run_verify(&cfg, spec, target.as_deref().unwrap_or_default())?,
    };
    let spec_cfg = cfg.spec_config();
    let envelope = json!({
        "command": name,
        "target": target,
        "version": env!("CARGO_PKG_VERSION"),
        "passed": outcome.passed,
        "summary": outcome.summary,
        "config": {"model": spec_cfg.model, "metric": spec_cfg.metric, "run": cfg.run},
        "report": outcome.report,
    });
    let bytes = match (format, outcome.table.take()) {
        (Format::Csv, Some(t)) => t,
        (Format::Csv, None) => output::flat_csv(&envelope),
        (Format::Json, _) => output::json_bytes(&envelope),
    };
    output::write(&bytes, cfg.run.out.as_deref())
        .map_err(|e| Failure::Config(format!("cannot write output: {e}")))?;
    Ok(outcome)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) => {
            eprintln!("{}", o.summary);
            ExitCode::from(if o.passed { 0 } else { 1 })
        }
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Eval(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
