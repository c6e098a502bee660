//! `bench` and `compare`: one row per (instance, method).
//!
//! CSV columns, in order: `instance, method, objective, value,
//! gap_vs_deflet_percent, gap_vs_enum_percent, data_age, reaction_time,
//! time_disparity, jitter, runtime_ms, timed_out, error`. Empty cells mean
//! "not applicable" or "method failed"; `error` says which.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use flet::baseline::gap_percent;
use flet::io::read_task_set;
use flet::{compare, BaselineKind, CompareMethod, CompareRow, Method, SearchConfig, Time};
use serde::Serialize;

use crate::{time_limit, BenchArgs, CompareArgs, Format, ObjectiveArgs};

#[derive(Debug, Serialize)]
struct BenchRow {
    instance: String,
    method: String,
    objective: &'static str,
    value: Option<f64>,
    gap_vs_deflet_percent: Option<f64>,
    gap_vs_enum_percent: Option<f64>,
    data_age: Option<Time>,
    reaction_time: Option<Time>,
    time_disparity: Option<Time>,
    jitter: Option<Time>,
    runtime_ms: f64,
    timed_out: bool,
    error: Option<String>,
}

fn round(x: f64, digits: i32) -> f64 {
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

fn parse_method(name: &str) -> Result<CompareMethod> {
    let name = name.trim().to_ascii_lowercase();
    Ok(match name.strip_prefix("flet-").unwrap_or(&name) {
        "enum" => CompareMethod::Flet(Method::Enumerate),
        "backtrack" => CompareMethod::Flet(Method::Backtrack),
        "symbolic" => CompareMethod::Flet(Method::Symbolic),
        "martinez18" => CompareMethod::Martinez18,
        other => CompareMethod::Baseline(other.parse::<BaselineKind>()?),
    })
}

/// Files as given; directories contribute their `*.json` files except
/// `manifest.json`, sorted by name.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(input)
                .with_context(|| format!("reading {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    p.extension().is_some_and(|x| x == "json")
                        && p.file_name().is_some_and(|n| n != "manifest.json")
                })
                .collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(input.clone());
        }
    }
    if out.is_empty() {
        bail!("no task-set files found");
    }
    Ok(out)
}

fn config(objective: &ObjectiveArgs, limit: Option<f64>) -> Result<SearchConfig> {
    let mut config = SearchConfig::new(Method::Backtrack, objective.spec()?);
    config.time_limit = time_limit(limit)?;
    Ok(config)
}

fn rows_for(path: &Path, methods: &[CompareMethod], config: &SearchConfig) -> Result<Vec<BenchRow>> {
    let dag = read_task_set(path)?;
    let rows = compare(&dag, methods, config);
    let enum_value = rows
        .iter()
        .find(|r| r.method == CompareMethod::Flet(Method::Enumerate).name())
        .and_then(|r| r.objective_value);
    let instance = path.display().to_string();
    Ok(rows
        .into_iter()
        .map(|r: CompareRow| {
            if let Some(e) = &r.error {
                log::warn!("{instance}: {}: {e}", r.method);
            }
            BenchRow {
                instance: instance.clone(),
                gap_vs_enum_percent: r
                    .objective_value
                    .zip(enum_value)
                    .and_then(|(v, e)| gap_percent(v, e))
                    .map(|g| round(g, 4)),
                method: r.method,
                objective: r.objective.short_name(),
                value: r.objective_value,
                gap_vs_deflet_percent: r.gap_percent.map(|g| round(g, 4)),
                data_age: r.data_age,
                reaction_time: r.reaction_time,
                time_disparity: r.time_disparity,
                jitter: r.jitter,
                runtime_ms: round(r.runtime_ms, 3),
                timed_out: r.timed_out,
                error: r.error,
            }
        })
        .collect())
}

fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Instances that fail to load are logged and skipped.
pub fn cmd_bench(args: &BenchArgs) -> Result<ExitCode> {
    let methods = args
        .methods
        .iter()
        .map(|m| parse_method(m))
        .collect::<Result<Vec<_>>>()?;
    let config = config(&args.objective, args.time_limit)?;
    let mut rows = Vec::new();
    for path in expand_inputs(&args.inputs)? {
        match rows_for(&path, &methods, &config) {
            Ok(r) => rows.extend(r),
            Err(e) => log::error!("{}: {e:#}", path.display()),
        }
    }
    match &args.out {
        Some(path) => write_csv(
            std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
            &rows,
        )?,
        None => write_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(ExitCode::SUCCESS)
}

pub fn cmd_compare(args: &CompareArgs) -> Result<ExitCode> {
    let config = config(&args.objective, args.time_limit)?;
    let rows = rows_for(&args.taskset, &CompareMethod::all(), &config)?;
    match args.format {
        Format::Csv => write_csv(std::io::stdout().lock(), &rows)?,
        Format::Json => outln!("{}", serde_json::to_string_pretty(&rows)?),
    }
    Ok(ExitCode::SUCCESS)
}
