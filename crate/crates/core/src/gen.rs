//! Random DAG task sets in the style of the WATERS automotive benchmark.

use std::collections::{BTreeSet, VecDeque};
use std::ops::RangeInclusive;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rta::response_times;
use crate::task::{Merge, Task, TaskDag, Time};

/// Automotive period set and its relative weights.
pub const WATERS_PERIODS: [(Time, u32); 9] = [
    (1, 3),
    (2, 2),
    (5, 2),
    (10, 25),
    (20, 25),
    (50, 3),
    (100, 20),
    (200, 1),
    (1000, 4),
];

/// Total utilization as a multiple of the core count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilizationRule {
    Uniform { lo: f64, hi: f64 },
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub tasks: usize,
    pub cores: u32,
    pub utilization: UtilizationRule,
    pub edge_probability: f64,
    /// Defaults to `[floor(1.5 N), 3 N]`, capped at the number of ordered
    /// task pairs.
    pub chain_count: Option<RangeInclusive<usize>>,
    pub merge_count: RangeInclusive<usize>,
    pub merge_sources: RangeInclusive<usize>,
    pub periods: Vec<(Time, u32)>,
    /// Drop sets that fail rate-monotonic response-time analysis.
    pub rm_filter: bool,
    pub max_attempts: u32,
    pub seed: u64,
}

impl GenConfig {
    pub fn new(tasks: usize, cores: u32, seed: u64) -> Self {
        Self {
            tasks,
            cores,
            utilization: UtilizationRule::Uniform { lo: 0.5, hi: 0.9 },
            edge_probability: 0.9,
            chain_count: None,
            merge_count: 1..=4,
            merge_sources: 2..=9,
            periods: WATERS_PERIODS.to_vec(),
            rm_filter: true,
            max_attempts: 1000,
            seed,
        }
    }

    pub fn chain_range(&self) -> RangeInclusive<usize> {
        let pairs = self.tasks * self.tasks.saturating_sub(1) / 2;
        self.chain_count
            .clone()
            .unwrap_or((self.tasks * 3 / 2).min(pairs)..=(self.tasks * 3).min(pairs))
    }

    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.into()));
        if self.tasks < 2 {
            return bad("at least two tasks are required");
        }
        if self.cores == 0 {
            return bad("at least one core is required");
        }
        if !(0.0..=1.0).contains(&self.edge_probability) {
            return bad("edge probability must lie in [0, 1]");
        }
        let (lo, hi) = match self.utilization {
            UtilizationRule::Uniform { lo, hi } => (lo, hi),
            UtilizationRule::Fixed(u) => (u, u),
        };
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return bad("utilization factors must satisfy 0 < lo <= hi <= 1");
        }
        let chains = self.chain_range();
        if chains.is_empty() || *chains.end() > self.tasks * (self.tasks - 1) / 2 {
            return bad("chain count range is empty or exceeds the number of task pairs");
        }
        if self.merge_count.is_empty() || self.merge_sources.is_empty() || *self.merge_sources.start() < 2 {
            return bad("merges need a nonempty count range and at least two sources");
        }
        if self.periods.is_empty() || self.periods.iter().any(|&(t, _)| t <= 0) {
            return bad("period set must be nonempty and positive");
        }
        if self.periods.iter().all(|&(_, w)| w == 0) {
            return bad("period weights must not all be zero");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be positive");
        }
        Ok(())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draw_periods<R: Rng>(rng: &mut R, n: usize, set: &[(Time, u32)]) -> Vec<Time> {
    let dist = WeightedIndex::new(set.iter().map(|&(_, w)| w)).expect("weights checked");
    (0..n).map(|_| set[dist.sample(rng)].0).collect()
}

/// `n` periods from the automotive set.
pub fn gen_periods(n: usize, seed: u64) -> Vec<Time> {
    draw_periods(&mut rng(seed), n, &WATERS_PERIODS)
}

fn uunifast<R: Rng>(rng: &mut R, n: usize, total: f64, max_draws: u32) -> Result<Vec<f64>> {
    if total.is_nan() || total <= 0.0 || total > n as f64 {
        return Err(Error::InvalidConfig(format!(
            "total utilization {total} cannot be split over {n} tasks"
        )));
    }
    for _ in 0..max_draws {
        let mut u = Vec::with_capacity(n);
        let mut sum = total;
        for i in 1..n {
            let next = sum * rng.gen::<f64>().powf(1.0 / (n - i) as f64);
            u.push(sum - next);
            sum = next;
        }
        u.push(sum);
        if u.iter().all(|&x| x <= 1.0) {
            return Ok(u);
        }
    }
    Err(Error::InvalidConfig(format!(
        "no split of {total} over {n} tasks with every part <= 1 in {max_draws} draws"
    )))
}

/// UUniFast split of `total`, redrawn until no part exceeds 1.
pub fn gen_utilizations(n: usize, total: f64, seed: u64) -> Result<Vec<f64>> {
    uunifast(&mut rng(seed), n, total, 10_000)
}

pub fn wcet(utilization: f64, period: Time) -> Time {
    ((utilization * period as f64).round() as Time).clamp(1, period)
}

/// Worst-fit decreasing: heaviest task first onto the least loaded core.
pub fn partition(utilizations: &[f64], cores: u32) -> Vec<u32> {
    let mut order: Vec<usize> = (0..utilizations.len()).collect();
    order.sort_by(|&a, &b| utilizations[b].total_cmp(&utilizations[a]).then(a.cmp(&b)));
    let mut load = vec![0.0f64; cores as usize];
    let mut out = vec![0; utilizations.len()];
    for i in order {
        let core = (0..load.len())
            .min_by(|&a, &b| load[a].total_cmp(&load[b]).then(a.cmp(&b)))
            .expect("at least one core");
        load[core] += utilizations[i];
        out[i] = core as u32;
    }
    out
}

fn shortest_path(succ: &[Vec<usize>], from: usize, to: usize) -> Option<Vec<usize>> {
    let mut prev = vec![usize::MAX; succ.len()];
    let mut queue = VecDeque::from([from]);
    prev[from] = from;
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut path = vec![to];
            while *path.last().unwrap() != from {
                path.push(prev[*path.last().unwrap()]);
            }
            path.reverse();
            return Some(path);
        }
        for &v in &succ[u] {
            if prev[v] == usize::MAX {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    None
}

fn build_dag<R: Rng>(rng: &mut R, tasks: Vec<Task>, config: &GenConfig) -> Option<TaskDag> {
    let n = tasks.len();
    let mut edges = Vec::new();
    let mut succ = vec![Vec::new(); n];
    let mut pred = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(config.edge_probability) {
                edges.push((i, j));
                succ[i].push(j);
                pred[j].push(i);
            }
        }
    }

    let range = config.chain_range();
    let target = rng.gen_range(range.clone());
    let mut chains: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut chain_list = Vec::new();
    for _ in 0..target * 50 {
        if chain_list.len() == target {
            break;
        }
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a >= b {
            continue;
        }
        if let Some(path) = shortest_path(&succ, a, b) {
            if chains.insert(path.clone()) {
                chain_list.push(path);
            }
        }
    }
    if chain_list.len() < *range.start() {
        return None;
    }

    let eligible: Vec<usize> = (0..n).filter(|&v| pred[v].len() >= 2).collect();
    let want = rng.gen_range(config.merge_count.clone()).min(eligible.len());
    if want < *config.merge_count.start() {
        return None;
    }
    let merges = eligible
        .choose_multiple(rng, want)
        .map(|&sink| {
            let max = (*config.merge_sources.end()).min(pred[sink].len());
            let k = rng.gen_range(*config.merge_sources.start()..=max);
            let mut sources: Vec<usize> = pred[sink].choose_multiple(rng, k).copied().collect();
            sources.sort_unstable();
            Merge { sink, sources }
        })
        .collect::<Vec<_>>();
    Some(TaskDag::new(tasks, edges, chain_list, merges))
}

/// Edges, chains and merges over the given tasks.
pub fn gen_dag(tasks: Vec<Task>, config: &GenConfig, seed: u64) -> Result<TaskDag> {
    config.check()?;
    let mut r = rng(seed);
    for _ in 0..config.max_attempts {
        if let Some(dag) = build_dag(&mut r, tasks.clone(), config) {
            return Ok(dag);
        }
    }
    Err(Error::InvalidConfig(format!(
        "no DAG with the requested chains and merges in {} attempts",
        config.max_attempts
    )))
}

/// A complete task set, redrawn until it validates and (optionally)
/// passes rate-monotonic analysis.
pub fn generate(config: &GenConfig) -> Result<TaskDag> {
    config.check()?;
    let mut r = rng(config.seed);
    let n = config.tasks;
    for _ in 0..config.max_attempts {
        let factor = match config.utilization {
            UtilizationRule::Uniform { lo, hi } if lo < hi => r.gen_range(lo..=hi),
            UtilizationRule::Uniform { lo, .. } => lo,
            UtilizationRule::Fixed(u) => u,
        };
        let total = (factor * config.cores as f64).min(n as f64);
        let periods = draw_periods(&mut r, n, &config.periods);
        let Ok(us) = uunifast(&mut r, n, total, 1000) else {
            continue;
        };
        let cores = partition(&us, config.cores);
        let tasks = (0..n)
            .map(|i| Task::new(i as u32, wcet(us[i], periods[i]), periods[i]).on_processor(cores[i]))
            .collect();
        let Some(dag) = build_dag(&mut r, tasks, config) else {
            continue;
        };
        if dag.validate().is_err() {
            continue;
        }
        if config.rm_filter && response_times(&dag).is_err() {
            continue;
        }
        return Ok(dag);
    }
    Err(Error::InvalidConfig(format!(
        "no valid task set in {} attempts",
        config.max_attempts
    )))
}

/// `count` sets with seeds `seed, seed + 1, ...`.
pub fn generate_corpus(config: &GenConfig, count: usize) -> Result<Vec<TaskDag>> {
    (0..count as u64)
        .map(|k| {
            let mut c = config.clone();
            c.seed = config.seed.wrapping_add(k);
            generate(&c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn period_frequencies_within_three_sigma() {
        let draws = 1000;
        let periods = gen_periods(draws, 7);
        let total: u32 = WATERS_PERIODS.iter().map(|&(_, w)| w).sum();
        assert_eq!(total, 85);
        for &(t, w) in &WATERS_PERIODS {
            let p = w as f64 / total as f64;
            let seen = periods.iter().filter(|&&x| x == t).count() as f64;
            let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
            assert!((seen - draws as f64 * p).abs() <= 3.0 * sigma, "period {t}: {seen}");
        }
        assert_eq!(gen_periods(50, 3), gen_periods(50, 3));
    }

    #[test]
    fn utilization_split() {
        let u = gen_utilizations(1, 0.4, 1).unwrap();
        assert_eq!(u, vec![0.4]);
        assert_eq!(wcet(u[0], 10), 4);
        assert!(gen_utilizations(3, 3.5, 1).is_err());
        for seed in 0..10_000 {
            let u = gen_utilizations(4, 2.7, seed).unwrap();
            assert!(u.iter().all(|&x| (0.0..=1.0).contains(&x)));
            assert!((u.iter().sum::<f64>() - 2.7).abs() < 1e-9);
        }
    }

    #[test]
    fn worst_fit_partition() {
        assert_eq!(partition(&[0.5, 0.9, 0.2, 0.4], 2), vec![1, 0, 0, 1]);
    }

    #[test]
    fn complete_forward_dag() {
        let mut c = GenConfig::new(5, 1, 0);
        c.edge_probability = 1.0;
        c.chain_count = Some(1..=3);
        let tasks = (0..5).map(|i| Task::new(i, 1, 10)).collect();
        let dag = gen_dag(tasks, &c, 4).unwrap();
        assert_eq!(dag.edges().len(), 10);
        assert!(dag.edges().iter().all(|e| e.producer < e.consumer));
        assert!(dag.chains().iter().all(|ch| ch.len() == 2));
    }

    #[test]
    fn twenty_one_tasks() {
        for seed in 0..5 {
            let dag = generate(&GenConfig::new(21, 4, seed)).unwrap();
            assert!((31..=63).contains(&dag.chains().len()), "{}", dag.chains().len());
            assert!((1..=4).contains(&dag.merges().len()));
            assert!(dag.merges().iter().all(|m| (2..=9).contains(&m.sources.len())));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn generated_sets_are_valid_and_schedulable(seed in any::<u64>(), n in 3usize..8, m in 1u32..4) {
            let mut c = GenConfig::new(n, m, seed);
            c.chain_count = Some(1..=2);
            c.merge_count = 0..=2;
            let dag = generate(&c).unwrap();
            prop_assert!(dag.validate().is_ok());
            let r = response_times(&dag).unwrap();
            for i in 0..n {
                prop_assert!(r.get(i) <= dag.task(i).deadline);
                prop_assert!(dag.task(i).wcet >= 1);
            }
            prop_assert!(dag.edges().iter().all(|e| e.producer < e.consumer));
            prop_assert_eq!(generate(&c).unwrap(), dag);
        }
    }
}
