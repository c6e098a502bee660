//! Virtual offset and deadline optimization for flexible Logical Execution
//! Time (fLET) task sets.

pub mod baseline;
pub mod error;
pub mod fixtures;
pub mod gen;
pub mod io;
pub mod lp;
pub mod metrics;
pub mod optimizer;
pub mod pattern;
pub mod rta;
pub mod sim;
pub mod task;

pub use baseline::{baseline_assignment, compare, Baseline, BaselineKind, CompareMethod, CompareRow};
pub use error::{Error, Result};
pub use gen::{generate, GenConfig};
pub use metrics::{FletOracle, MetricsReport, RwOracle};
pub use optimizer::{optimize, refine, Method, OptimizationResult, SearchConfig};
pub use pattern::{EdgePattern, GraphPattern, PatternKind};
pub use rta::{response_times, ResponseTimes};
pub use task::{Edge, FletAssignment, Job, Merge, Metric, ObjectiveSpec, Task, TaskDag, Time};
