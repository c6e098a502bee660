//! Periodic tasks, their dependency graph, and flexible-LET timing.
//!
//! All timing quantities are integers in an abstract time unit. Tasks are
//! addressed by their position in [`TaskDag::tasks`]; the `id` field is the
//! external identifier carried through file formats.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Time = i64;

pub fn gcd(a: Time, b: Time) -> Time {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

pub fn lcm(a: Time, b: Time) -> Time {
    if a == 0 || b == 0 {
        return 0;
    }
    (a / gcd(a, b)) * b
}

/// A periodic task `(C, T, D^org)` mapped onto one processor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: u32,
    pub name: Option<String>,
    pub wcet: Time,
    pub period: Time,
    /// Original relative deadline `D^org`.
    pub deadline: Time,
    /// Explicit fixed priority (lower is higher). `None` means rate-monotonic.
    pub priority: Option<i64>,
    pub processor: u32,
    /// Known release offset of the physical task; shifts every read and write.
    pub release_offset: Time,
}

impl Task {
    /// Implicit-deadline task on processor 0 with rate-monotonic priority.
    pub fn new(id: u32, wcet: Time, period: Time) -> Self {
        Self {
            id,
            name: None,
            wcet,
            period,
            deadline: period,
            priority: None,
            processor: 0,
            release_offset: 0,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn on_processor(mut self, processor: u32) -> Self {
        self.processor = processor;
        self
    }

    pub fn with_deadline(mut self, deadline: Time) -> Self {
        self.deadline = deadline;
        self
    }

    pub fn with_priority(mut self, priority: i64) -> Self {
        self.priority = Some(priority);
        self
    }

    pub fn label(&self) -> String {
        match &self.name {
            Some(n) => n.clone(),
            None => format!("tau{}", self.id),
        }
    }
}

/// Data dependency `producer -> consumer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub producer: usize,
    pub consumer: usize,
}

/// A sink task fusing the outputs of several source tasks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub sink: usize,
    pub sources: Vec<usize>,
}

/// The `q`-th job of a task. `q` may be negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Job {
    pub task: usize,
    pub q: i64,
}

impl Job {
    pub fn new(task: usize, q: i64) -> Self {
        Self { task, q }
    }
}

impl fmt::Display for Job {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J({},{})", self.task, self.q)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NonPositiveWcet { task: usize },
    WcetExceedsDeadline { task: usize },
    DeadlineExceedsPeriod { task: usize },
    NegativeReleaseOffset { task: usize },
    DuplicateId { id: u32 },
    DuplicatePriority { processor: u32, priority: i64 },
    DanglingEdge { edge: usize },
    SelfLoop { edge: usize },
    DuplicateEdge { edge: usize },
    CycleDetected,
    EmptyChain { chain: usize },
    UnknownChainTask { chain: usize, position: usize },
    ChainStepNotEdge { chain: usize, position: usize },
    MergeSourceNotEdge { merge: usize, source: usize },
    UnknownMergeTask { merge: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NonPositiveWcet { task } => write!(f, "task {task}: wcet must be positive"),
            WcetExceedsDeadline { task } => write!(f, "task {task}: wcet exceeds deadline"),
            DeadlineExceedsPeriod { task } => write!(f, "task {task}: deadline exceeds period"),
            NegativeReleaseOffset { task } => write!(f, "task {task}: negative release offset"),
            DuplicateId { id } => write!(f, "duplicate task id {id}"),
            DuplicatePriority { processor, priority } => {
                write!(f, "priority {priority} used twice on processor {processor}")
            }
            DanglingEdge { edge } => write!(f, "edge {edge}: unknown endpoint"),
            SelfLoop { edge } => write!(f, "edge {edge}: self loop"),
            DuplicateEdge { edge } => write!(f, "edge {edge}: duplicate"),
            CycleDetected => write!(f, "cycle detected"),
            EmptyChain { chain } => write!(f, "chain {chain}: empty"),
            UnknownChainTask { chain, position } => {
                write!(f, "chain {chain}[{position}]: unknown task")
            }
            ChainStepNotEdge { chain, position } => {
                write!(f, "chain {chain}[{position}]: chain step not an edge")
            }
            MergeSourceNotEdge { merge, source } => {
                write!(f, "merge {merge}: source {source} -> sink is not an edge")
            }
            UnknownMergeTask { merge } => write!(f, "merge {merge}: unknown task"),
        }
    }
}

/// Task set plus dependency edges, cause-effect chains and merges.
///
/// Immutable after construction. Chains are sequences of task indices,
/// merges reference task indices, and edges are stored in input order
/// (the edge index is the position in [`TaskDag::edges`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskDag {
    tasks: Vec<Task>,
    priorities: Vec<i64>,
    edges: Vec<Edge>,
    edge_lookup: HashMap<(usize, usize), usize>,
    chains: Vec<Vec<usize>>,
    merges: Vec<Merge>,
}

impl TaskDag {
    pub fn new(
        tasks: Vec<Task>,
        edges: Vec<(usize, usize)>,
        chains: Vec<Vec<usize>>,
        merges: Vec<Merge>,
    ) -> Self {
        let mut rm: Vec<usize> = (0..tasks.len()).collect();
        rm.sort_by_key(|&i| (tasks[i].period, tasks[i].id, i));
        let mut priorities = vec![0; tasks.len()];
        for (rank, &i) in rm.iter().enumerate() {
            priorities[i] = tasks[i].priority.unwrap_or(rank as i64);
        }
        let edges: Vec<Edge> = edges
            .into_iter()
            .map(|(producer, consumer)| Edge { producer, consumer })
            .collect();
        let mut edge_lookup = HashMap::new();
        for (k, e) in edges.iter().enumerate() {
            edge_lookup.entry((e.producer, e.consumer)).or_insert(k);
        }
        Self {
            tasks,
            priorities,
            edges,
            edge_lookup,
            chains,
            merges,
        }
    }

    pub fn tasks(&self) -> &[Task] {
        &self.tasks
    }

    pub fn task(&self, i: usize) -> &Task {
        &self.tasks[i]
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn period(&self, i: usize) -> Time {
        self.tasks[i].period
    }

    /// Effective fixed priority (lower value wins).
    pub fn priority(&self, i: usize) -> i64 {
        self.priorities[i]
    }

    pub fn edge_index(&self, producer: usize, consumer: usize) -> Option<usize> {
        self.edge_lookup.get(&(producer, consumer)).copied()
    }

    pub fn edge(&self, producer: usize, consumer: usize) -> Result<usize> {
        self.edge_index(producer, consumer)
            .ok_or(Error::UnknownEdge { producer, consumer })
    }

    /// Edge indices traversed by a chain, in order.
    pub fn chain_edges(&self, chain: &[usize]) -> Result<Vec<usize>> {
        chain.windows(2).map(|w| self.edge(w[0], w[1])).collect()
    }

    /// Same DAG with different chains and merges.
    pub fn with_objectives(&self, chains: Vec<Vec<usize>>, merges: Vec<Merge>) -> Self {
        let mut dag = self.clone();
        dag.chains = chains;
        dag.merges = merges;
        dag
    }

    /// Index of the task with external id `id`.
    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.tasks.iter().position(|t| t.id == id)
    }

    pub fn hyper_period(&self) -> Result<Time> {
        hyper_period(self.tasks.iter().map(|t| t.period))
    }

    /// Hyper-period of a subset of tasks, by index.
    pub fn hyper_period_of(&self, subset: &[usize]) -> Result<Time> {
        hyper_period(subset.iter().map(|&i| self.tasks[i].period))
    }

    /// LCM of the periods at both ends of edge `producer -> consumer`.
    pub fn super_period(&self, producer: usize, consumer: usize) -> Result<Time> {
        self.edge(producer, consumer)?;
        Ok(lcm(self.period(producer), self.period(consumer)))
    }

    /// Checks every structural invariant; never aborts on the first problem.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut v = Vec::new();
        let n = self.tasks.len();
        let mut ids = HashSet::new();
        let mut prios = HashSet::new();
        for (i, t) in self.tasks.iter().enumerate() {
            if t.wcet <= 0 {
                v.push(Violation::NonPositiveWcet { task: i });
            }
            if t.wcet > t.deadline {
                v.push(Violation::WcetExceedsDeadline { task: i });
            }
            if t.deadline > t.period {
                v.push(Violation::DeadlineExceedsPeriod { task: i });
            }
            if t.release_offset < 0 {
                v.push(Violation::NegativeReleaseOffset { task: i });
            }
            if !ids.insert(t.id) {
                v.push(Violation::DuplicateId { id: t.id });
            }
            if !prios.insert((t.processor, self.priorities[i])) {
                v.push(Violation::DuplicatePriority {
                    processor: t.processor,
                    priority: self.priorities[i],
                });
            }
        }

        let mut seen = HashSet::new();
        let mut structurally_ok = true;
        for (k, e) in self.edges.iter().enumerate() {
            if e.producer >= n || e.consumer >= n {
                v.push(Violation::DanglingEdge { edge: k });
                structurally_ok = false;
            } else if e.producer == e.consumer {
                v.push(Violation::SelfLoop { edge: k });
                structurally_ok = false;
            } else if !seen.insert((e.producer, e.consumer)) {
                v.push(Violation::DuplicateEdge { edge: k });
            }
        }
        if structurally_ok && !self.is_acyclic() {
            v.push(Violation::CycleDetected);
        }

        for (c, chain) in self.chains.iter().enumerate() {
            if chain.is_empty() {
                v.push(Violation::EmptyChain { chain: c });
            }
            for (p, &t) in chain.iter().enumerate() {
                if t >= n {
                    v.push(Violation::UnknownChainTask { chain: c, position: p });
                }
            }
            for (p, w) in chain.windows(2).enumerate() {
                if self.edge_index(w[0], w[1]).is_none() {
                    v.push(Violation::ChainStepNotEdge {
                        chain: c,
                        position: p + 1,
                    });
                }
            }
        }
        for (m, merge) in self.merges.iter().enumerate() {
            if merge.sink >= n || merge.sources.iter().any(|&s| s >= n) {
                v.push(Violation::UnknownMergeTask { merge: m });
                continue;
            }
            for &s in &merge.sources {
                if self.edge_index(s, merge.sink).is_none() {
                    v.push(Violation::MergeSourceNotEdge {
                        merge: m,
                        source: s,
                    });
                }
            }
        }

        if v.is_empty() {
            Ok(())
        } else {
            Err(v)
        }
    }

    fn is_acyclic(&self) -> bool {
        let n = self.tasks.len();
        let mut indegree = vec![0usize; n];
        let mut out = vec![Vec::new(); n];
        for e in &self.edges {
            indegree[e.consumer] += 1;
            out[e.producer].push(e.consumer);
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut visited = 0;
        while let Some(u) = queue.pop_front() {
            visited += 1;
            for &w in &out[u] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    queue.push_back(w);
                }
            }
        }
        visited == n
    }
}

pub fn hyper_period(periods: impl IntoIterator<Item = Time>) -> Result<Time> {
    periods
        .into_iter()
        .fold(None, |acc, t| Some(acc.map_or(t, |a| lcm(a, t))))
        .ok_or(Error::EmptyTaskSubset)
}

/// Virtual offsets and virtual deadlines, one per task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FletAssignment {
    pub offsets: Vec<Time>,
    pub deadlines: Vec<Time>,
}

impl FletAssignment {
    /// `O = 0`, `D = D^org`.
    pub fn default_let(dag: &TaskDag) -> Self {
        Self {
            offsets: vec![0; dag.len()],
            deadlines: dag.tasks().iter().map(|t| t.deadline).collect(),
        }
    }

    /// Read and write instants of `job`.
    pub fn read_write_times(&self, dag: &TaskDag, job: Job) -> (Time, Time) {
        let t = dag.task(job.task);
        let release = t.release_offset + job.q * t.period;
        (
            release + self.offsets[job.task],
            release + self.deadlines[job.task],
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    DataAge,
    ReactionTime,
    TimeDisparity,
}

impl Metric {
    pub fn is_dart(self) -> bool {
        matches!(self, Metric::DataAge | Metric::ReactionTime)
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Metric::DataAge => "da",
            Metric::ReactionTime => "rt",
            Metric::TimeDisparity => "td",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub metric: Metric,
    /// Weight of the jitter term; only meaningful for time disparity.
    pub jitter_weight: f64,
}

impl ObjectiveSpec {
    pub fn data_age() -> Self {
        Self {
            metric: Metric::DataAge,
            jitter_weight: 0.0,
        }
    }

    pub fn reaction_time() -> Self {
        Self {
            metric: Metric::ReactionTime,
            jitter_weight: 0.0,
        }
    }

    pub fn time_disparity(jitter_weight: f64) -> Self {
        Self {
            metric: Metric::TimeDisparity,
            jitter_weight,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.jitter_weight.is_nan() || self.jitter_weight < 0.0 {
            return Err(Error::InvalidConfig("jitter weight must be nonnegative".into()));
        }
        if self.jitter_weight != 0.0 && self.metric != Metric::TimeDisparity {
            return Err(Error::InvalidConfig(
                "jitter weight applies to time disparity only".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn hyper_period_examples() {
        assert_eq!(hyper_period([5, 20, 10, 40]).unwrap(), 40);
        assert_eq!(hyper_period([1000, 2000, 40]).unwrap(), 2000);
        assert_eq!(hyper_period([20, 10]).unwrap(), 20);
        assert_eq!(hyper_period([]), Err(Error::EmptyTaskSubset));
    }

    #[test]
    fn super_period_examples() {
        let dag = fixtures::running_example();
        assert_eq!(dag.super_period(1, 2).unwrap(), 20);
        assert_eq!(dag.super_period(0, 1).unwrap(), 20);
        assert_eq!(dag.super_period(3, 1).unwrap(), 40);
        assert!(matches!(
            dag.super_period(2, 1),
            Err(Error::UnknownEdge { .. })
        ));
    }

    #[test]
    fn read_write_examples() {
        let dag = TaskDag::new(vec![Task::new(0, 1, 10)], vec![], vec![], vec![]);
        let let_ = FletAssignment::default_let(&dag);
        assert_eq!(let_.read_write_times(&dag, Job::new(0, 3)), (30, 40));

        let dag = fixtures::running_example();
        let a = FletAssignment {
            offsets: vec![0, 11, 6, 0],
            deadlines: vec![1, 16, 9, 40],
        };
        assert_eq!(a.read_write_times(&dag, Job::new(2, 1)), (16, 19));

        let dag = TaskDag::new(vec![Task::new(0, 1, 5)], vec![], vec![], vec![]);
        let a = FletAssignment {
            offsets: vec![4],
            deadlines: vec![5],
        };
        assert_eq!(a.read_write_times(&dag, Job::new(0, -2)), (-6, -5));
    }

    #[test]
    fn release_offset_shifts_both_instants() {
        let mut t = Task::new(0, 1, 10);
        t.release_offset = 3;
        let dag = TaskDag::new(vec![t], vec![], vec![], vec![]);
        let a = FletAssignment {
            offsets: vec![2],
            deadlines: vec![7],
        };
        assert_eq!(a.read_write_times(&dag, Job::new(0, 1)), (15, 20));
    }

    #[test]
    fn fixtures_validate() {
        assert_eq!(fixtures::running_example().validate(), Ok(()));
        assert_eq!(fixtures::case_study().validate(), Ok(()));
    }

    #[test]
    fn chain_step_not_an_edge() {
        let dag = fixtures::running_example();
        let bad = dag.with_objectives(vec![vec![0, 2]], vec![]);
        let v = bad.validate().unwrap_err();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().contains("chain step not an edge"));
    }

    #[test]
    fn cycle_detected() {
        let tasks = (0..3).map(|i| Task::new(i, 1, 10)).collect();
        let dag = TaskDag::new(tasks, vec![(0, 1), (1, 2), (2, 0)], vec![], vec![]);
        let v = dag.validate().unwrap_err();
        assert!(v.iter().any(|x| x.to_string() == "cycle detected"));
    }

    #[test]
    fn parameter_violations() {
        let tasks = vec![
            Task::new(0, 12, 10),
            Task::new(1, 1, 10).with_deadline(11),
            Task::new(1, 1, 20).with_priority(0),
            Task::new(3, 1, 20).with_priority(0),
        ];
        let dag = TaskDag::new(tasks, vec![], vec![], vec![]);
        let v = dag.validate().unwrap_err();
        assert!(v.contains(&Violation::WcetExceedsDeadline { task: 0 }));
        assert!(v.contains(&Violation::DeadlineExceedsPeriod { task: 1 }));
        assert!(v.contains(&Violation::DuplicateId { id: 1 }));
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::DuplicatePriority { .. })));
    }

    #[test]
    fn rate_monotonic_default() {
        let dag = fixtures::running_example();
        // periods 5, 20, 10, 40
        assert_eq!(
            (0..4).map(|i| dag.priority(i)).collect::<Vec<_>>(),
            vec![0, 2, 1, 3]
        );
    }

    #[test]
    fn merge_source_must_be_edge() {
        let dag = fixtures::running_example();
        let bad = dag.with_objectives(
            vec![],
            vec![Merge {
                sink: 1,
                sources: vec![0, 2],
            }],
        );
        let v = bad.validate().unwrap_err();
        assert_eq!(v, vec![Violation::MergeSourceNotEdge { merge: 0, source: 2 }]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rw_affine_in_q(o in 0i64..10, len in 0i64..10, t in 10i64..50, q in -20i64..20) {
                let dag = TaskDag::new(vec![Task::new(0, 1, t)], vec![], vec![], vec![]);
                let a = FletAssignment { offsets: vec![o], deadlines: vec![o + len] };
                let (r0, w0) = a.read_write_times(&dag, Job::new(0, q));
                let (r1, w1) = a.read_write_times(&dag, Job::new(0, q + 1));
                prop_assert_eq!((r1 - r0, w1 - w0), (t, t));
                prop_assert_eq!(w0 - r0, len);
            }

            #[test]
            fn hyper_period_of_union_is_multiple(
                a in proptest::collection::vec(1i64..60, 1..5),
                b in proptest::collection::vec(1i64..60, 0..5),
            ) {
                let h1 = hyper_period(a.clone()).unwrap();
                let h = hyper_period(a.into_iter().chain(b)).unwrap();
                prop_assert_eq!(h % h1, 0);
            }
        }
    }
}
