//! JSON task-set and assignment documents.
//!
//! ```json
//! {
//!   "tasks": [{"id": 0, "name": "SLAM", "period": 1000, "wcet": 500,
//!              "deadline": 1000, "processor": 0, "priority": 3,
//!              "release_offset": 0}],
//!   "edges": [[0, 1]],
//!   "chains": [[0, 1, 2]],
//!   "merges": [{"sink": 2, "sources": [4, 1]}]
//! }
//! ```
//!
//! Tasks, edges, chains and merges refer to tasks by `id`. `deadline`
//! defaults to the period, `priority` to rate-monotonic, `processor` and
//! `release_offset` to 0.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{FletAssignment, Merge, Task, TaskDag, Time};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub period: Time,
    pub wcet: Time,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline: Option<Time>,
    #[serde(default)]
    pub processor: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<i64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub release_offset: Time,
}

fn is_zero(t: &Time) -> bool {
    *t == 0
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MergeRecord {
    pub sink: u32,
    pub sources: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSetDocument {
    pub tasks: Vec<TaskRecord>,
    #[serde(default)]
    pub edges: Vec<[u32; 2]>,
    #[serde(default)]
    pub chains: Vec<Vec<u32>>,
    #[serde(default)]
    pub merges: Vec<MergeRecord>,
}

impl TaskSetDocument {
    pub fn from_dag(dag: &TaskDag) -> Self {
        let id = |i: usize| dag.task(i).id;
        Self {
            tasks: dag
                .tasks()
                .iter()
                .map(|t| TaskRecord {
                    id: t.id,
                    name: t.name.clone(),
                    period: t.period,
                    wcet: t.wcet,
                    deadline: Some(t.deadline),
                    processor: t.processor,
                    priority: t.priority,
                    release_offset: t.release_offset,
                })
                .collect(),
            edges: dag.edges().iter().map(|e| [id(e.producer), id(e.consumer)]).collect(),
            chains: dag
                .chains()
                .iter()
                .map(|c| c.iter().map(|&t| id(t)).collect())
                .collect(),
            merges: dag
                .merges()
                .iter()
                .map(|m| MergeRecord {
                    sink: id(m.sink),
                    sources: m.sources.iter().map(|&s| id(s)).collect(),
                })
                .collect(),
        }
    }

    /// Resolves ids and validates every structural invariant.
    pub fn into_dag(self) -> Result<TaskDag> {
        let tasks: Vec<Task> = self
            .tasks
            .iter()
            .map(|r| Task {
                id: r.id,
                name: r.name.clone(),
                wcet: r.wcet,
                period: r.period,
                deadline: r.deadline.unwrap_or(r.period),
                priority: r.priority,
                processor: r.processor,
                release_offset: r.release_offset,
            })
            .collect();
        let index = |what: &str, id: u32| -> Result<usize> {
            tasks
                .iter()
                .position(|t| t.id == id)
                .ok_or_else(|| Error::InvalidTaskSet(format!("{what} refers to unknown task id {id}")))
        };
        let edges = self
            .edges
            .iter()
            .map(|&[p, c]| Ok((index("edge", p)?, index("edge", c)?)))
            .collect::<Result<Vec<_>>>()?;
        let chains = self
            .chains
            .iter()
            .map(|c| c.iter().map(|&t| index("chain", t)).collect())
            .collect::<Result<Vec<_>>>()?;
        let merges = self
            .merges
            .iter()
            .map(|m| {
                Ok(Merge {
                    sink: index("merge", m.sink)?,
                    sources: m
                        .sources
                        .iter()
                        .map(|&s| index("merge", s))
                        .collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let dag = TaskDag::new(tasks, edges, chains, merges);
        dag.validate().map_err(|vs| {
            Error::InvalidTaskSet(
                vs.iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; "),
            )
        })?;
        Ok(dag)
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, origin: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: format!("{origin}: {}", e.path()),
        message: e.inner().to_string(),
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn parse_task_set(text: &str) -> Result<TaskDag> {
    parse::<TaskSetDocument>(text, "task set")?.into_dag()
}

pub fn read_task_set(path: &Path) -> Result<TaskDag> {
    let text = read(path)?;
    parse::<TaskSetDocument>(&text, &path.display().to_string())?.into_dag()
}

pub fn task_set_to_json(dag: &TaskDag) -> String {
    serde_json::to_string_pretty(&TaskSetDocument::from_dag(dag)).expect("task sets serialize")
}

/// `{"offsets": [...], "deadlines": [...]}` in task order.
pub fn parse_assignment(text: &str, tasks: usize) -> Result<FletAssignment> {
    let a: FletAssignment = parse(text, "assignment")?;
    if a.offsets.len() != tasks || a.deadlines.len() != tasks {
        return Err(Error::Parse {
            path: "assignment".into(),
            message: format!(
                "expected {tasks} offsets and deadlines, got {} and {}",
                a.offsets.len(),
                a.deadlines.len()
            ),
        });
    }
    Ok(a)
}

pub fn read_assignment(path: &Path, tasks: usize) -> Result<FletAssignment> {
    parse_assignment(&read(path)?, tasks)
}

pub fn assignment_to_json(a: &FletAssignment) -> String {
    serde_json::to_string_pretty(a).expect("assignments serialize")
}
