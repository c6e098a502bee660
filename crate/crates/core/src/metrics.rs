//! Worst-case data age, reaction time, time disparity and its jitter,
//! computed directly from read/write instants through immediate backward
//! and forward job chains.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{FletAssignment, Job, Merge, TaskDag, Time};

/// Read and write instants of every job of every task.
///
/// For a fixed task both instants must be strictly increasing in `q`.
pub trait RwOracle {
    fn period(&self, task: usize) -> Time;
    fn read(&self, task: usize, q: i64) -> Time;
    fn write(&self, task: usize, q: i64) -> Time;
}

/// Deterministic fLET read/write instants.
#[derive(Debug, Clone, Copy)]
pub struct FletOracle<'a> {
    dag: &'a TaskDag,
    assignment: &'a FletAssignment,
}

impl<'a> FletOracle<'a> {
    pub fn new(dag: &'a TaskDag, assignment: &'a FletAssignment) -> Self {
        Self { dag, assignment }
    }
}

impl RwOracle for FletOracle<'_> {
    fn period(&self, task: usize) -> Time {
        self.dag.period(task)
    }

    fn read(&self, task: usize, q: i64) -> Time {
        self.assignment.read_write_times(self.dag, Job::new(task, q)).0
    }

    fn write(&self, task: usize, q: i64) -> Time {
        self.assignment.read_write_times(self.dag, Job::new(task, q)).1
    }
}

/// The producer job whose output `consumer` reads: the unique `q` with
/// `wr(q) <= re(consumer) < wr(q + 1)`.
pub fn last_reading_job<O: RwOracle + ?Sized>(oracle: &O, producer: usize, consumer: Job) -> Job {
    let re = oracle.read(consumer.task, consumer.q);
    let w0 = oracle.write(producer, 0);
    let mut q = (re - w0).div_euclid(oracle.period(producer));
    while oracle.write(producer, q + 1) <= re {
        q += 1;
    }
    while oracle.write(producer, q) > re {
        q -= 1;
    }
    Job::new(producer, q)
}

/// The first consumer job that reads `producer`'s output: the unique `q`
/// with `re(q - 1) < wr(producer) <= re(q)`.
pub fn first_reacting_job<O: RwOracle + ?Sized>(oracle: &O, producer: Job, consumer: usize) -> Job {
    let wr = oracle.write(producer.task, producer.q);
    let r0 = oracle.read(consumer, 0);
    let mut q = -((r0 - wr).div_euclid(oracle.period(consumer)));
    while oracle.read(consumer, q - 1) >= wr {
        q -= 1;
    }
    while oracle.read(consumer, q) < wr {
        q += 1;
    }
    Job::new(consumer, q)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainLatency {
    pub value: Time,
    /// The longest job chain, source job first.
    pub witness: Vec<Job>,
}

/// Immediate backward job chain ending at `sink_job`, source first.
pub fn backward_chain<O: RwOracle + ?Sized>(oracle: &O, chain: &[usize], sink_q: i64) -> Vec<Job> {
    let mut jobs = vec![Job::new(*chain.last().expect("nonempty chain"), sink_q)];
    for &producer in chain.iter().rev().skip(1) {
        let next = last_reading_job(oracle, producer, *jobs.last().unwrap());
        jobs.push(next);
    }
    jobs.reverse();
    jobs
}

/// Immediate forward job chain starting at `source_q`.
pub fn forward_chain<O: RwOracle + ?Sized>(oracle: &O, chain: &[usize], source_q: i64) -> Vec<Job> {
    let mut jobs = vec![Job::new(chain[0], source_q)];
    for &consumer in &chain[1..] {
        let next = first_reacting_job(oracle, *jobs.last().unwrap(), consumer);
        jobs.push(next);
    }
    jobs
}

fn chain_length<O: RwOracle + ?Sized>(oracle: &O, jobs: &[Job]) -> Time {
    let (first, last) = (jobs[0], jobs[jobs.len() - 1]);
    oracle.write(last.task, last.q) - oracle.read(first.task, first.q)
}

fn longest<O: RwOracle + ?Sized>(
    oracle: &O,
    chains: impl Iterator<Item = Vec<Job>>,
) -> ChainLatency {
    let mut best: Option<ChainLatency> = None;
    for jobs in chains {
        let value = chain_length(oracle, &jobs);
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(ChainLatency {
                value,
                witness: jobs,
            });
        }
    }
    best.expect("nonempty window")
}

/// Worst-case data age over sink jobs in one chain hyper-period.
pub fn data_age<O: RwOracle + ?Sized>(dag: &TaskDag, chain: &[usize], oracle: &O) -> Result<ChainLatency> {
    let sink = *chain.last().ok_or(Error::EmptyTaskSubset)?;
    let window = dag.hyper_period_of(chain)? / dag.period(sink);
    Ok(longest(
        oracle,
        (0..window).map(|q| backward_chain(oracle, chain, q)),
    ))
}

/// Worst-case reaction time over source jobs in one chain hyper-period.
pub fn reaction_time<O: RwOracle + ?Sized>(
    dag: &TaskDag,
    chain: &[usize],
    oracle: &O,
) -> Result<ChainLatency> {
    let source = *chain.first().ok_or(Error::EmptyTaskSubset)?;
    let window = dag.hyper_period_of(chain)? / dag.period(source);
    Ok(longest(
        oracle,
        (0..window).map(|q| forward_chain(oracle, chain, q)),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disparity {
    pub max: Time,
    pub min: Time,
    pub jitter: Time,
    /// Sink job with the largest disparity and its last-reading jobs.
    pub max_witness: (Job, Vec<Job>),
    pub min_witness: (Job, Vec<Job>),
}

/// Spread of the last-reading write instants seen by one sink job.
pub fn disparity_of<O: RwOracle + ?Sized>(oracle: &O, merge: &Merge, sink: Job) -> (Time, Vec<Job>) {
    let jobs: Vec<Job> = merge
        .sources
        .iter()
        .map(|&s| last_reading_job(oracle, s, sink))
        .collect();
    let writes = jobs.iter().map(|j| oracle.write(j.task, j.q));
    let (lo, hi) = writes.fold((Time::MAX, Time::MIN), |(lo, hi), w| (lo.min(w), hi.max(w)));
    let td = if jobs.is_empty() { 0 } else { hi - lo };
    (td, jobs)
}

pub fn time_disparity<O: RwOracle + ?Sized>(dag: &TaskDag, merge: &Merge, oracle: &O) -> Result<Disparity> {
    if merge.sources.len() < 2 {
        log::warn!(
            "merge into task {} has {} source(s); time disparity is identically 0",
            merge.sink,
            merge.sources.len()
        );
    }
    let mut members = merge.sources.clone();
    members.push(merge.sink);
    let window = dag.hyper_period_of(&members)? / dag.period(merge.sink);
    let mut max: Option<(Time, (Job, Vec<Job>))> = None;
    let mut min: Option<(Time, (Job, Vec<Job>))> = None;
    for q in 0..window {
        let sink = Job::new(merge.sink, q);
        let (td, jobs) = disparity_of(oracle, merge, sink);
        if max.as_ref().is_none_or(|m| td > m.0) {
            max = Some((td, (sink, jobs.clone())));
        }
        if min.as_ref().is_none_or(|m| td < m.0) {
            min = Some((td, (sink, jobs)));
        }
    }
    let (max, max_witness) = max.expect("nonempty window");
    let (min, min_witness) = min.expect("nonempty window");
    Ok(Disparity {
        max,
        min,
        jitter: max - min,
        max_witness,
        min_witness,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainReport {
    pub tasks: Vec<usize>,
    pub data_age: ChainLatency,
    pub reaction_time: ChainLatency,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeReport {
    pub sink: usize,
    pub sources: Vec<usize>,
    pub time_disparity: Disparity,
}

/// Every chain and merge metric of a task set under one oracle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub chains: Vec<ChainReport>,
    pub merges: Vec<MergeReport>,
}

impl MetricsReport {
    pub fn compute<O: RwOracle + ?Sized>(dag: &TaskDag, oracle: &O) -> Result<Self> {
        let chains = dag
            .chains()
            .iter()
            .map(|c| {
                Ok(ChainReport {
                    tasks: c.clone(),
                    data_age: data_age(dag, c, oracle)?,
                    reaction_time: reaction_time(dag, c, oracle)?,
                })
            })
            .collect::<Result<_>>()?;
        let merges = dag
            .merges()
            .iter()
            .map(|m| {
                Ok(MergeReport {
                    sink: m.sink,
                    sources: m.sources.clone(),
                    time_disparity: time_disparity(dag, m, oracle)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { chains, merges })
    }

    pub fn total_data_age(&self) -> Time {
        self.chains.iter().map(|c| c.data_age.value).sum()
    }

    pub fn total_reaction_time(&self) -> Time {
        self.chains.iter().map(|c| c.reaction_time.value).sum()
    }

    pub fn total_disparity(&self) -> Time {
        self.merges.iter().map(|m| m.time_disparity.max).sum()
    }

    pub fn total_jitter(&self) -> Time {
        self.merges.iter().map(|m| m.time_disparity.jitter).sum()
    }
}
