use thiserror::Error;

use crate::task::Time;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("hyper-period of an empty task subset is undefined")]
    EmptyTaskSubset,

    #[error("unknown task index {0}")]
    UnknownTask(usize),

    #[error("no edge {producer} -> {consumer} in the task graph")]
    UnknownEdge { producer: usize, consumer: usize },

    #[error("edge index {0} out of range")]
    UnknownEdgeIndex(usize),

    #[error("task {task} is unschedulable: response time exceeds deadline {deadline}")]
    Unschedulable { task: usize, deadline: Time },

    #[error("deadline miss in simulation: job ({task}, {job}) finished at {finish}, deadline {deadline}")]
    DeadlineMiss {
        task: usize,
        job: i64,
        finish: Time,
        deadline: Time,
    },

    #[error("linear system is infeasible")]
    Infeasible,

    #[error("objective is unbounded below")]
    Unbounded,

    #[error("patterns are not comparable: {0}")]
    Incomparable(&'static str),

    #[error("method does not support this objective: {0}")]
    UnsupportedObjective(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("task set invalid: {0}")]
    InvalidTaskSet(String),

    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}
