//! `flet`: optimize, analyze and benchmark fLET task sets from the shell.

/// `println!` that reports a closed stdout as an error instead of panicking.
macro_rules! outln {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout().lock(), $($arg)*)?
    };
}

mod bench;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flet::gen::{generate_corpus, GenConfig, UtilizationRule};
use flet::io::{read_assignment, read_task_set, task_set_to_json};
use flet::pattern::enumerate_edge_patterns;
use flet::rta::schedulability_violations;
use flet::sim::simulate;
use flet::{
    baseline_assignment, optimize, refine, response_times, BaselineKind, FletOracle, Method, Metric,
    MetricsReport, ObjectiveSpec, PatternKind, SearchConfig,
};

use crate::output::{write_json, MetricsFile, ResultFile, RunEcho, RunManifest};

#[derive(Parser)]
#[command(name = "flet", version, about = "Virtual offset and deadline optimization for fLET task sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for offsets and deadlines minimizing a latency objective.
    Optimize(OptimizeArgs),
    /// Evaluate an assignment or a baseline protocol without optimizing.
    Analyze(AnalyzeArgs),
    /// Generate a seeded corpus of random task sets.
    Generate(GenerateArgs),
    /// Run several methods over a corpus and emit one CSV row per run.
    Bench(BenchArgs),
    /// Compare every baseline and search method on one task set.
    Compare(CompareArgs),
    /// List the communication patterns of every edge.
    Patterns(PatternsArgs),
    /// Dump a simulated schedule as CSV.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Da,
    Rt,
    Td,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Enum,
    Backtrack,
    Symbolic,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Enum => Method::Enumerate,
            MethodArg::Backtrack => Method::Backtrack,
            MethodArg::Symbolic => Method::Symbolic,
        }
    }
}

#[derive(Args)]
struct ObjectiveArgs {
    #[arg(long, value_enum, default_value = "da")]
    metric: MetricArg,
    /// Weight of the jitter term, time disparity only. Defaults to 1.
    #[arg(long)]
    jitter_weight: Option<f64>,
}

impl ObjectiveArgs {
    fn spec(&self) -> Result<ObjectiveSpec> {
        let spec = match self.metric {
            MetricArg::Da => ObjectiveSpec::data_age(),
            MetricArg::Rt => ObjectiveSpec::reaction_time(),
            MetricArg::Td => ObjectiveSpec::time_disparity(self.jitter_weight.unwrap_or(1.0)),
        };
        if self.jitter_weight.is_some() && self.metric != MetricArg::Td {
            bail!("--jitter-weight only applies to --metric td");
        }
        spec.check()?;
        Ok(spec)
    }
}

#[derive(Args)]
struct OptimizeArgs {
    taskset: PathBuf,
    #[command(flatten)]
    objective: ObjectiveArgs,
    /// Defaults to symbolic for da/rt and backtrack for td.
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Seconds; the best assignment found so far is reported on expiry.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Re-solve the winning pattern against offset-aware response times.
    #[arg(long)]
    refine: bool,
    /// Writes assignment.json, metrics.json, result.json and manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    taskset: PathBuf,
    #[arg(long, conflicts_with = "baseline", required_unless_present = "baseline")]
    assignment: Option<PathBuf>,
    /// deflet, bradatsch16, maia23 or implicit.
    #[arg(long)]
    baseline: Option<BaselineKind>,
    /// Writes metrics.json here instead of printing it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 10)]
    tasks: usize,
    #[arg(long, default_value_t = 2)]
    cores: u32,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Total utilization of the set; drawn per set when omitted.
    #[arg(long)]
    utilization: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Task-set files or directories of them.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Comma-separated: deflet, bradatsch16, maia23, implicit, enum,
    /// backtrack, symbolic, martinez18.
    #[arg(long, value_delimiter = ',', default_value = "deflet,enum,backtrack,symbolic")]
    methods: Vec<String>,
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[arg(long)]
    time_limit: Option<f64>,
    /// CSV file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CompareArgs {
    taskset: PathBuf,
    #[command(flatten)]
    objective: ObjectiveArgs,
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct PatternsArgs {
    taskset: PathBuf,
    /// da lists last-reading patterns, rt first-reacting ones.
    #[arg(long, value_enum, default_value = "da")]
    metric: MetricArg,
}

#[derive(Args)]
struct SimulateArgs {
    taskset: PathBuf,
    /// Offsets are taken from here; zero when omitted.
    #[arg(long)]
    assignment: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    hyperperiods: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn time_limit(secs: Option<f64>) -> Result<Option<Duration>> {
    secs.map(|s| Duration::try_from_secs_f64(s).context("--time-limit must be a nonnegative number of seconds"))
        .transpose()
}

/// Exit code 2 when the search stopped at its time limit.
fn cmd_optimize(args: &OptimizeArgs) -> Result<ExitCode> {
    let started = Instant::now();
    let dag = read_task_set(&args.taskset)?;
    let objective = args.objective.spec()?;
    let method = args.method.map(Method::from).unwrap_or(match objective.metric {
        Metric::TimeDisparity => Method::Backtrack,
        _ => Method::Symbolic,
    });
    let mut config = SearchConfig::new(method, objective);
    config.time_limit = time_limit(args.time_limit)?;
    let mut result = optimize(&dag, &config)?;
    if args.refine {
        result = refine(&dag, &result)?;
    }
    let metrics = MetricsFile::new(MetricsReport::compute(&dag, &FletOracle::new(&dag, &result.assignment))?);
    let echo = RunEcho {
        command: "optimize".into(),
        inputs: vec![args.taskset.display().to_string()],
        method: Some(method.short_name().into()),
        metric: Some(objective.metric.short_name().into()),
        jitter_weight: (objective.metric == Metric::TimeDisparity).then_some(objective.jitter_weight),
        time_limit_s: args.time_limit,
        seed: None,
        refine: args.refine,
    };
    outln!(
        "{} {}: value {}, score {}{}",
        method.short_name(),
        objective.metric.short_name(),
        result.value,
        result.score,
        if result.timed_out { " (time limit hit)" } else { "" }
    );
    outln!("{}", metrics.totals);
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        write_json(&out.join("assignment.json"), &result.assignment)?;
        write_json(&out.join("metrics.json"), &metrics)?;
        write_json(&out.join("result.json"), &ResultFile::new(echo.clone(), &result))?;
        write_json(&out.join("manifest.json"), &RunManifest::new(echo, out, started))?;
    }
    Ok(if result.timed_out { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<()> {
    let dag = read_task_set(&args.taskset)?;
    let report = match (&args.assignment, args.baseline) {
        (Some(path), _) => {
            let a = read_assignment(path, dag.len())?;
            let violations = schedulability_violations(&dag, &a, &response_times(&dag)?);
            if !violations.is_empty() {
                bail!("assignment is not schedulable:\n  {}", violations.join("\n  "));
            }
            MetricsReport::compute(&dag, &FletOracle::new(&dag, &a))?
        }
        (None, Some(kind)) => baseline_assignment(kind, &dag)?.metrics(&dag)?,
        (None, None) => bail!("pass --assignment or --baseline"),
    };
    let metrics = MetricsFile::new(report);
    match &args.out {
        Some(out) => {
            std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
            write_json(&out.join("metrics.json"), &metrics)?;
            outln!("{}", metrics.totals);
        }
        None => outln!("{}", serde_json::to_string_pretty(&metrics)?),
    }
    Ok(())
}

fn cmd_generate(args: &GenerateArgs) -> Result<()> {
    let started = Instant::now();
    let mut config = GenConfig::new(args.tasks, args.cores, args.seed);
    if let Some(u) = args.utilization {
        config.utilization = UtilizationRule::Fixed(u);
    }
    let corpus = generate_corpus(&config, args.count)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    for (k, dag) in corpus.iter().enumerate() {
        let path = args.out.join(format!("taskset-{k:03}.json"));
        std::fs::write(&path, task_set_to_json(dag) + "\n")
            .with_context(|| format!("writing {}", path.display()))?;
        outln!("{}", path.display());
    }
    let echo = RunEcho {
        command: "generate".into(),
        inputs: Vec::new(),
        method: None,
        metric: None,
        jitter_weight: None,
        time_limit_s: None,
        seed: Some(args.seed),
        refine: false,
    };
    write_json(&args.out.join("manifest.json"), &RunManifest::new(echo, &args.out, started))
}

fn cmd_patterns(args: &PatternsArgs) -> Result<()> {
    let dag = read_task_set(&args.taskset)?;
    let kind = match args.metric {
        MetricArg::Da => PatternKind::LastReading,
        MetricArg::Rt => PatternKind::FirstReacting,
        MetricArg::Td => bail!("patterns are listed for da or rt"),
    };
    let r = response_times(&dag)?;
    for (k, e) in dag.edges().iter().enumerate() {
        let patterns = enumerate_edge_patterns(&dag, k, &r, kind)?;
        outln!(
            "E{k} {} -> {}: {} patterns",
            dag.task(e.producer).label(),
            dag.task(e.consumer).label(),
            patterns.len()
        );
        for p in patterns {
            outln!("  {p}");
        }
    }
    Ok(())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let dag = read_task_set(&args.taskset)?;
    let offsets = match &args.assignment {
        Some(path) => read_assignment(path, dag.len())?.offsets,
        None => vec![0; dag.len()],
    };
    let trace = simulate(&dag, &offsets, args.hyperperiods)?;
    match &args.out {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            trace.write_csv(std::io::BufWriter::new(file))?;
        }
        None => trace.write_csv(std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Optimize(a) => cmd_optimize(a),
        Command::Analyze(a) => cmd_analyze(a).map(|()| ExitCode::SUCCESS),
        Command::Generate(a) => cmd_generate(a).map(|()| ExitCode::SUCCESS),
        Command::Bench(a) => bench::cmd_bench(a),
        Command::Compare(a) => bench::cmd_compare(a),
        Command::Patterns(a) => cmd_patterns(a).map(|()| ExitCode::SUCCESS),
        Command::Simulate(a) => cmd_simulate(a).map(|()| ExitCode::SUCCESS),
    }
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<std::io::Error>())
        .any(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
