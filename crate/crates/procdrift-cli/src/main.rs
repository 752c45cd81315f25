//! Batch front end: detect drifts in a log, generate synthetic logs with
//! known drift regions, score a detection report against ground truth, and
//! run the full benchmark sweep.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors (missing
//! files, schema violations, detector preconditions).

mod bench;

use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::{ArgGroup, Args, Parser, Subcommand};
use procdrift::detector::{detect, DetectorConfig, DriftReport, WindowGrowth};
use procdrift::evaluate::score;
use procdrift::eventlog::EventLog;
use procdrift::loggen::{
    derive_model, generate_log, ChangePattern, DriftDistribution, GroundTruth,
    ProcessTree,
};
use serde::Deserialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "procdrift", version, about = "Concept drift detection for process event logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect drifts in an event log; writes a JSON report and a
    /// per-window diagnostics CSV
    Detect(DetectArgs),
    /// Generate a synthetic event log with known drift regions
    Generate(GenerateArgs),
    /// Score a detection report against ground truth
    Evaluate(EvaluateArgs),
    /// Run the pattern-by-distribution benchmark grid
    Bench(BenchArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// Event log to read (.csv or .xes)
    #[arg(long)]
    log: PathBuf,
    /// Report JSON to write
    #[arg(long)]
    out: PathBuf,
    /// Diagnostics CSV to write (default: report path with .diagnostics.csv)
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    /// Smallest sliding-window size
    #[arg(long, default_value_t = 50)]
    min_window: usize,
    /// Significance level for the slope test
    #[arg(long, default_value_t = 0.05)]
    significance: f64,
    /// Keep the window at min-window instead of adapting it upward
    #[arg(long)]
    fixed_window: bool,
}

#[derive(Args)]
#[command(group(ArgGroup::new("change").required(true).args(["pattern", "derived"])))]
struct GenerateArgs {
    /// Base process tree JSON (default: the built-in loan-application model)
    #[arg(long)]
    base: Option<PathBuf>,
    /// Change pattern to derive the post-drift model from the base
    #[arg(long)]
    pattern: Option<String>,
    /// Post-drift process tree JSON, instead of a pattern
    #[arg(long)]
    derived: Option<PathBuf>,
    /// Drift distribution, e.g. linear:0.01, gaussian:20:10,
    /// exponential:0.5, constant:0.5:200
    #[arg(long)]
    dist: String,
    /// Number of drift regions
    #[arg(long, default_value_t = 9)]
    drifts: usize,
    /// Seed for model derivation and log generation
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Event log to write (.csv or .xes)
    #[arg(long)]
    out_log: PathBuf,
    /// Ground-truth JSON to write
    #[arg(long)]
    out_truth: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Detection report JSON (as written by detect)
    #[arg(long)]
    report: PathBuf,
    /// Ground-truth JSON (as written by generate)
    #[arg(long)]
    truth: PathBuf,
    /// Evaluation JSON to write
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Base seed for the whole grid
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Drift regions per generated log
    #[arg(long, default_value_t = 9)]
    drifts: usize,
    /// Aggregate CSV to write
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{err}");
                std::process::exit(0);
            }
            let first = err.to_string();
            eprintln!("{}", first.lines().next().unwrap_or("usage error"));
            std::process::exit(1);
        }
    };
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(2);
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Detect(args) => run_detect(args),
        Command::Generate(args) => run_generate(args),
        Command::Evaluate(args) => run_evaluate(args),
        Command::Bench(args) => run_bench(args),
    }
}

fn run_detect(args: DetectArgs) -> anyhow::Result<()> {
    let log = EventLog::read_path(&args.log)
        .with_context(|| format!("reading {}", args.log.display()))?;
    let config = DetectorConfig {
        min_window: args.min_window,
        significance: args.significance,
        growth: if args.fixed_window { WindowGrowth::Fixed } else { WindowGrowth::Double },
    };
    let report = detect(&log, &config)?;

    let diagnostics = args
        .diagnostics
        .unwrap_or_else(|| args.out.with_extension("diagnostics.csv"));
    let file = fs::File::create(&diagnostics)
        .with_context(|| format!("creating {}", diagnostics.display()))?;
    report.write_diagnostics_csv(file)?;

    let body = json!({
        "sudden": report.sudden,
        "gradual": report.gradual,
        "diagnostics_csv": diagnostics.to_string_lossy(),
    });
    write_json(&args.out, &body)
}

fn run_generate(args: GenerateArgs) -> anyhow::Result<()> {
    let base = match &args.base {
        Some(path) => read_tree(path)?,
        None => ProcessTree::loanlike(),
    };
    let derived = match (&args.pattern, &args.derived) {
        (Some(code), None) => {
            let pattern: ChangePattern = code.parse()?;
            derive_model(&base, pattern, args.seed)?
        }
        (None, Some(path)) => read_tree(path)?,
        // clap's argument group guarantees exactly one of the two
        _ => unreachable!("pattern/derived group"),
    };
    let dist: DriftDistribution = args.dist.parse()?;
    let (log, truth) = generate_log(&base, &derived, &dist, args.drifts, args.seed)?;
    log.write_path(&args.out_log)
        .with_context(|| format!("writing {}", args.out_log.display()))?;
    write_json(&args.out_truth, &serde_json::to_value(&truth)?)
}

fn run_evaluate(args: EvaluateArgs) -> anyhow::Result<()> {
    #[derive(Deserialize)]
    struct ReportFile {
        sudden: Vec<usize>,
        gradual: Vec<(usize, usize)>,
    }
    let report: ReportFile = read_json(&args.report)?;
    let truth: GroundTruth = read_json(&args.truth)?;
    let detections = DriftReport {
        sudden: report.sudden,
        gradual: report.gradual,
        ..Default::default()
    }
    .detections();
    let result = score(&truth.regions, &detections);
    let matches: Vec<serde_json::Value> = result
        .per_match
        .iter()
        .map(|m| {
            json!({
                "real": [m.real.0, m.real.1],
                "detected": [m.detected.0, m.detected.1],
                "delay": m.delay,
                "overlap": m.overlap,
            })
        })
        .collect();
    let body = json!({
        "true_positives": result.true_positives,
        "false_positives": result.false_positives,
        "false_negatives": result.false_negatives,
        "precision": result.precision,
        "recall": result.recall,
        "f_score": result.f_score,
        "mean_delay": result.mean_delay(),
        "mean_overlap": result.mean_overlap(),
        "matches": matches,
    });
    write_json(&args.out, &body)
}

fn run_bench(args: BenchArgs) -> anyhow::Result<()> {
    let config = bench::BenchConfig { seed: args.seed, drifts: args.drifts };
    let csv = bench::run_grid(&config)?;
    fs::write(&args.out, csv)
        .with_context(|| format!("writing {}", args.out.display()))?;
    Ok(())
}

fn read_tree(path: &PathBuf) -> anyhow::Result<ProcessTree> {
    read_json(path)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> anyhow::Result<T> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
}

fn write_json(path: &PathBuf, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
