//! Result files. Everything except `manifest.json` is a pure function of the
//! inputs and flags; wall-clock data lives only in the manifest.

use std::fmt;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use flet::optimizer::Counters;
use flet::{MetricsReport, OptimizationResult, Time};
use serde::Serialize;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Totals {
    pub data_age: Time,
    pub reaction_time: Time,
    pub time_disparity: Time,
    pub jitter: Time,
}

impl fmt::Display for Totals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DA {} RT {} TD {} jitter {}",
            self.data_age, self.reaction_time, self.time_disparity, self.jitter
        )
    }
}

#[derive(Debug, Serialize)]
pub struct MetricsFile {
    pub totals: Totals,
    pub report: MetricsReport,
}

impl MetricsFile {
    pub fn new(report: MetricsReport) -> Self {
        Self {
            totals: Totals {
                data_age: report.total_data_age(),
                reaction_time: report.total_reaction_time(),
                time_disparity: report.total_disparity(),
                jitter: report.total_jitter(),
            },
            report,
        }
    }
}

/// The flags of a run, echoed into its results.
#[derive(Debug, Clone, Serialize)]
pub struct RunEcho {
    pub command: String,
    pub inputs: Vec<String>,
    pub method: Option<String>,
    pub metric: Option<String>,
    pub jitter_weight: Option<f64>,
    pub time_limit_s: Option<f64>,
    pub seed: Option<u64>,
    pub refine: bool,
}

#[derive(Debug, Serialize)]
pub struct ResultFile {
    pub run: RunEcho,
    pub value: Time,
    pub per_item: Vec<Time>,
    pub jitter: Vec<Time>,
    pub score: f64,
    /// `sum_C (T_sink + T_source)` over the chains, symbolic search only.
    pub suboptimality_bound: Option<Time>,
    pub bounds: Option<Vec<Time>>,
    pub pattern_indices: Vec<Option<usize>>,
    pub counters: Counters,
    pub timed_out: bool,
    pub refined: bool,
}

impl ResultFile {
    pub fn new(run: RunEcho, r: &OptimizationResult) -> Self {
        Self {
            run,
            value: r.value,
            per_item: r.per_item.clone(),
            jitter: r.jitter.clone(),
            score: r.score,
            suboptimality_bound: r.total_bound(),
            bounds: r.bounds.clone(),
            pattern_indices: r.pattern_indices.clone(),
            counters: r.counters,
            timed_out: r.timed_out,
            refined: r.refined,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub run: RunEcho,
    pub output_dir: String,
    pub version: &'static str,
    pub unix_time_s: u64,
    pub elapsed_ms: f64,
}

impl RunManifest {
    pub fn new(run: RunEcho, out: &Path, started: Instant) -> Self {
        Self {
            run,
            output_dir: out.display().to_string(),
            version: env!("CARGO_PKG_VERSION"),
            unix_time_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        }
    }
}
