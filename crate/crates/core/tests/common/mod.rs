#![allow(dead_code)]

use flet::gen::{generate, GenConfig, UtilizationRule};
use flet::optimizer::Problem;
use flet::{Metric, TaskDag};

/// Periods small enough that exhaustive enumeration stays cheap.
pub const SMALL_PERIODS: [(i64, u32); 6] = [(4, 1), (5, 2), (6, 1), (10, 2), (15, 1), (20, 2)];

pub fn small_config(seed: u64) -> GenConfig {
    let mut c = GenConfig::new(3 + (seed % 4) as usize, 1 + (seed % 2) as u32, seed);
    c.utilization = UtilizationRule::Uniform { lo: 0.3, hi: 0.8 };
    c.edge_probability = 0.45;
    c.chain_count = Some(1..=2);
    c.merge_count = 0..=1;
    c.merge_sources = 2..=3;
    c.periods = SMALL_PERIODS.to_vec();
    c
}

/// RM-schedulable sets with 3 to 6 tasks, at most two chains, and a
/// pattern space within `space` for both DA and RT.
pub fn small_corpus(count: usize, seed: u64, space: std::ops::RangeInclusive<u128>) -> Vec<TaskDag> {
    let mut out = Vec::with_capacity(count);
    let mut s = seed;
    while out.len() < count {
        let dag = generate(&small_config(s)).expect("small configs generate");
        s += 1;
        let fits = [Metric::DataAge, Metric::ReactionTime]
            .into_iter()
            .all(|m| Problem::new(&dag, m).is_ok_and(|p| space.contains(&p.space_size())));
        if fits {
            out.push(dag);
        }
    }
    out
}
