//! Worst-case response-time analysis for partitioned fixed-priority
//! preemptive scheduling.
//!
//! The bound ignores release offsets and virtual intervals, so it is
//! computed once per task set and reused by every pattern evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{FletAssignment, Task, TaskDag, Time};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResponseTimes(pub Vec<Time>);

impl ResponseTimes {
    pub fn get(&self, task: usize) -> Time {
        self.0[task]
    }

    pub fn as_slice(&self) -> &[Time] {
        &self.0
    }
}

/// Least fixed point of `R = C + sum_hp ceil(R / T_j) C_j`, starting from
/// `R = C`. Returns `None` once the iterate exceeds the task's deadline.
pub fn rta_fixed_point(task: &Task, higher_priority: &[&Task]) -> Option<Time> {
    rta_from(task, higher_priority, task.wcet)
}

/// Fixed-point iteration from an arbitrary start in `[C, R*]`.
pub fn rta_from(task: &Task, higher_priority: &[&Task], start: Time) -> Option<Time> {
    let mut r = start.max(task.wcet);
    loop {
        if r > task.deadline {
            return None;
        }
        let next = task.wcet
            + higher_priority
                .iter()
                .map(|hp| ceil_div(r, hp.period) * hp.wcet)
                .sum::<Time>();
        if next == r {
            return Some(r);
        }
        r = next;
    }
}

fn ceil_div(a: Time, b: Time) -> Time {
    -((-a).div_euclid(b))
}

/// Tasks sharing `task`'s processor with higher effective priority.
pub fn higher_priority_set(dag: &TaskDag, task: usize) -> Vec<&Task> {
    let me = dag.task(task);
    (0..dag.len())
        .filter(|&j| {
            j != task
                && dag.task(j).processor == me.processor
                && dag.priority(j) < dag.priority(task)
        })
        .map(|j| dag.task(j))
        .collect()
}

pub fn response_times(dag: &TaskDag) -> Result<ResponseTimes> {
    (0..dag.len())
        .map(|i| {
            let hp = higher_priority_set(dag, i);
            rta_fixed_point(dag.task(i), &hp).ok_or(Error::Unschedulable {
                task: i,
                deadline: dag.task(i).deadline,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(ResponseTimes)
}

/// `0 <= O_i`, `O_i + R_i <= D_i`, `D_i <= D_i^org` for every task.
pub fn check_schedulability(dag: &TaskDag, a: &FletAssignment, r: &ResponseTimes) -> bool {
    schedulability_violations(dag, a, r).is_empty()
}

/// Human-readable list of violated schedulability constraints.
pub fn schedulability_violations(
    dag: &TaskDag,
    a: &FletAssignment,
    r: &ResponseTimes,
) -> Vec<String> {
    let mut out = Vec::new();
    if a.offsets.len() != dag.len() || a.deadlines.len() != dag.len() {
        out.push(format!(
            "assignment covers {}/{} tasks, task set has {}",
            a.offsets.len(),
            a.deadlines.len(),
            dag.len()
        ));
        return out;
    }
    for i in 0..dag.len() {
        let (o, d) = (a.offsets[i], a.deadlines[i]);
        if o < 0 {
            out.push(format!("task {i}: offset {o} < 0"));
        }
        if o + r.get(i) > d {
            out.push(format!(
                "task {i}: offset {o} + response time {} > deadline {d}",
                r.get(i)
            ));
        }
        if d > dag.task(i).deadline {
            out.push(format!(
                "task {i}: deadline {d} > original deadline {}",
                dag.task(i).deadline
            ));
        }
    }
    out
}
