//! Discrete-time simulation of partitioned preemptive fixed-priority
//! scheduling with every job executing for its WCET.
//!
//! The trace feeds implicit communication (read at start, write at finish),
//! the Maia23 LET intervals, and offset-aware response times.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::RwOracle;
use crate::task::{FletAssignment, TaskDag, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobRecord {
    pub task: usize,
    pub q: i64,
    pub release: Time,
    pub start: Time,
    pub finish: Time,
    pub processor: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleTrace {
    hyper_period: Time,
    horizon: Time,
    /// Release time of job 0, per task.
    phases: Vec<Time>,
    periods: Vec<Time>,
    /// Jobs of each task indexed by `q` (all `q >= 0` released before the horizon).
    jobs: Vec<Vec<JobRecord>>,
    /// First hyper-period boundary after which the schedule repeats.
    steady_start: Time,
}

impl ScheduleTrace {
    pub fn hyper_period(&self) -> Time {
        self.hyper_period
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn jobs_of(&self, task: usize) -> &[JobRecord] {
        &self.jobs[task]
    }

    pub fn job(&self, task: usize, q: i64) -> Option<&JobRecord> {
        usize::try_from(q).ok().and_then(|q| self.jobs[task].get(q))
    }

    pub fn iter(&self) -> impl Iterator<Item = &JobRecord> {
        self.jobs.iter().flatten()
    }

    /// Start of the hyper-period used as the steady-state window.
    pub fn steady_start(&self) -> Time {
        self.steady_start
    }

    /// Job indices of `task` released in the steady-state window.
    pub fn steady_jobs(&self, task: usize) -> impl Iterator<Item = &JobRecord> {
        let t = self.periods[task];
        let first = self.steady_start / t;
        let count = self.hyper_period / t;
        let jobs = &self.jobs[task];
        (first..first + count).map(move |q| &jobs[q as usize])
    }

    /// Release time of job 0 of `task` (release offset plus virtual offset).
    pub fn phase(&self, task: usize) -> Time {
        self.phases[task]
    }

    /// CSV dump with columns `task,q,release,start,finish,processor`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "task,q,release,start,finish,processor")?;
        for j in self.iter() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                j.task, j.q, j.release, j.start, j.finish, j.processor
            )?;
        }
        Ok(())
    }
}

/// Simulates `hyperperiods` hyper-periods. Job `q` of task `i` is released at
/// `release_offset_i + offsets[i] + q T_i`; every job released before the
/// horizon runs to completion.
pub fn simulate(dag: &TaskDag, offsets: &[Time], hyperperiods: u32) -> Result<ScheduleTrace> {
    if hyperperiods < 2 {
        return Err(Error::InvalidConfig(
            "simulation needs at least two hyper-periods".into(),
        ));
    }
    let h = dag.hyper_period()?;
    let phases = phases(dag, offsets);
    let max_phase = phases.iter().copied().max().unwrap_or(0);
    let steady_start = h * (1 + ceil_div(max_phase, h));
    run(dag, phases, h, h * Time::from(hyperperiods), steady_start)
}

/// Simulation long enough for [`ScheduleTrace::steady_jobs`] to be valid.
pub fn simulate_steady(dag: &TaskDag, offsets: &[Time]) -> Result<ScheduleTrace> {
    let h = dag.hyper_period()?;
    let max_phase = phases(dag, offsets).into_iter().max().unwrap_or(0);
    let k = 3 + 2 * ceil_div(max_phase, h);
    simulate(dag, offsets, k as u32)
}

fn phases(dag: &TaskDag, offsets: &[Time]) -> Vec<Time> {
    dag.tasks()
        .iter()
        .enumerate()
        .map(|(i, t)| t.release_offset + offsets.get(i).copied().unwrap_or(0))
        .collect()
}

fn ceil_div(a: Time, b: Time) -> Time {
    -((-a).div_euclid(b))
}

fn run(
    dag: &TaskDag,
    phases: Vec<Time>,
    hyper_period: Time,
    horizon: Time,
    steady_start: Time,
) -> Result<ScheduleTrace> {
    let n = dag.len();
    let periods: Vec<Time> = dag.tasks().iter().map(|t| t.period).collect();
    let mut jobs: Vec<Vec<JobRecord>> = (0..n)
        .map(|i| {
            let t = dag.task(i);
            (0..)
                .map(|q: i64| phases[i] + q * t.period)
                .take_while(|&r| r < horizon)
                .enumerate()
                .map(|(q, release)| JobRecord {
                    task: i,
                    q: q as i64,
                    release,
                    start: Time::MIN,
                    finish: Time::MIN,
                    processor: t.processor,
                })
                .collect()
        })
        .collect();

    let mut processors: Vec<u32> = dag.tasks().iter().map(|t| t.processor).collect();
    processors.sort_unstable();
    processors.dedup();

    for p in processors {
        // (release, priority, task, q)
        let mut pending: Vec<(Time, i64, usize, usize)> = jobs
            .iter()
            .enumerate()
            .filter(|(i, _)| dag.task(*i).processor == p)
            .flat_map(|(i, js)| {
                js.iter()
                    .map(move |j| (j.release, dag.priority(i), i, j.q as usize))
            })
            .collect();
        pending.sort_unstable();

        let mut remaining: Vec<Vec<Time>> = (0..n)
            .map(|i| vec![dag.task(i).wcet; jobs[i].len()])
            .collect();
        let mut ready: BinaryHeap<Reverse<(i64, usize, usize)>> = BinaryHeap::new();
        let mut next = 0;
        let mut now: Time = Time::MIN;
        loop {
            if ready.is_empty() {
                if next == pending.len() {
                    break;
                }
                now = now.max(pending[next].0);
            }
            while next < pending.len() && pending[next].0 <= now {
                let (_, prio, i, q) = pending[next];
                ready.push(Reverse((prio, i, q)));
                next += 1;
            }
            let Reverse((_, i, q)) = *ready.peek().expect("ready job");
            let rem = remaining[i][q];
            let until = match pending.get(next) {
                Some(&(r, ..)) => (now + rem).min(r),
                None => now + rem,
            };
            let job = &mut jobs[i][q];
            if job.start == Time::MIN {
                job.start = now;
            }
            remaining[i][q] -= until - now;
            now = until;
            if remaining[i][q] == 0 {
                job.finish = now;
                ready.pop();
                let t = dag.task(i);
                let deadline = job.release - phases[i] + t.release_offset + t.deadline;
                if job.finish > deadline {
                    return Err(Error::DeadlineMiss {
                        task: i,
                        job: job.q,
                        finish: job.finish,
                        deadline,
                    });
                }
            }
        }
    }

    Ok(ScheduleTrace {
        hyper_period,
        horizon,
        phases,
        periods,
        jobs,
        steady_start,
    })
}

/// Implicit communication: a job reads when it starts and writes when it
/// finishes. Jobs outside the simulated window repeat with the hyper-period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicitOracle {
    hyper_period: Time,
    periods: Vec<Time>,
    first: Vec<i64>,
    reads: Vec<Vec<Time>>,
    writes: Vec<Vec<Time>>,
}

impl ImplicitOracle {
    fn locate(&self, task: usize, q: i64) -> (usize, Time) {
        let n = self.reads[task].len() as i64;
        let rel = q - self.first[task];
        (rel.rem_euclid(n) as usize, rel.div_euclid(n) * self.hyper_period)
    }
}

impl RwOracle for ImplicitOracle {
    fn period(&self, task: usize) -> Time {
        self.periods[task]
    }

    fn read(&self, task: usize, q: i64) -> Time {
        let (k, shift) = self.locate(task, q);
        self.reads[task][k] + shift
    }

    fn write(&self, task: usize, q: i64) -> Time {
        let (k, shift) = self.locate(task, q);
        self.writes[task][k] + shift
    }
}

pub fn implicit_rw_times(trace: &ScheduleTrace) -> ImplicitOracle {
    let n = trace.jobs.len();
    let first = (0..n)
        .map(|i| trace.steady_start / trace.periods[i])
        .collect();
    let reads = (0..n)
        .map(|i| trace.steady_jobs(i).map(|j| j.start).collect())
        .collect();
    let writes = (0..n)
        .map(|i| trace.steady_jobs(i).map(|j| j.finish).collect())
        .collect();
    ImplicitOracle {
        hyper_period: trace.hyper_period,
        periods: trace.periods.clone(),
        first,
        reads,
        writes,
    }
}

/// LET interval from the smallest relative start to the largest relative
/// finish of each task in the steady window.
pub fn maia_let_intervals(trace: &ScheduleTrace) -> FletAssignment {
    let n = trace.jobs.len();
    let mut offsets = Vec::with_capacity(n);
    let mut deadlines = Vec::with_capacity(n);
    for i in 0..n {
        let rel = |j: &JobRecord| j.release;
        offsets.push(trace.steady_jobs(i).map(|j| j.start - rel(j)).min().unwrap_or(0));
        deadlines.push(trace.steady_jobs(i).map(|j| j.finish - rel(j)).max().unwrap_or(0));
    }
    FletAssignment { offsets, deadlines }
}

/// Response times measured from virtual releases `q T_i + O_i` in a
/// simulation where jobs are released at their virtual offsets.
pub fn exact_response_times(dag: &TaskDag, offsets: &[Time]) -> Result<Vec<Time>> {
    let trace = simulate_steady(dag, offsets)?;
    Ok((0..dag.len())
        .map(|i| {
            trace
                .steady_jobs(i)
                .map(|j| j.finish - j.release)
                .max()
                .unwrap_or(0)
        })
        .collect())
}
