//! Reference task sets.

use crate::task::{Merge, Task, TaskDag};

/// Four-task running example on one processor under rate-monotonic priorities.
///
/// Periods are `{5, 20, 10, 40}` with implicit deadlines. WCETs are not
/// published for this example; `{1, 3, 1, 1}` is the smallest choice that
/// yields `R_0 = 1`, `R_1 = 5` and the published last-reading pattern
/// intervals. Edges: `E_0 = 0 -> 1`, `E_1 = 1 -> 2`, `E_2 = 3 -> 1`.
/// Chains `0 -> 1 -> 2` and `3 -> 1 -> 2`; task 1 merges tasks 0 and 3.
pub fn running_example() -> TaskDag {
    let tasks = vec![
        Task::new(0, 1, 5),
        Task::new(1, 3, 20),
        Task::new(2, 1, 10),
        Task::new(3, 1, 40),
    ];
    TaskDag::new(
        tasks,
        vec![(0, 1), (1, 2), (3, 1)],
        vec![vec![0, 1, 2], vec![3, 1, 2]],
        vec![Merge {
            sink: 1,
            sources: vec![0, 3],
        }],
    )
}

/// Autonomous mobile robot task set (milliseconds), one task per core.
///
/// Critical chain SLAM -> Path Planning -> Control; Control fuses Depth
/// Estimation and Path Planning.
pub fn case_study() -> TaskDag {
    let tasks = vec![
        Task::new(0, 500, 1000).with_name("SLAM").on_processor(0),
        Task::new(1, 1188, 2000)
            .with_name("Path Planning")
            .on_processor(1),
        Task::new(2, 37, 40).with_name("Control").on_processor(2),
        Task::new(3, 10000, 10000)
            .with_name("Task Allocation")
            .on_processor(3),
        Task::new(4, 400, 500)
            .with_name("Depth Estimation")
            .on_processor(4),
    ];
    TaskDag::new(
        tasks,
        vec![(0, 1), (1, 2), (4, 2), (3, 1)],
        vec![vec![0, 1, 2]],
        vec![Merge {
            sink: 2,
            sources: vec![4, 1],
        }],
    )
}
