//! Search over graph patterns for the virtual offsets and deadlines that
//! minimize data age, reaction time, or time disparity plus jitter.
//!
//! Every complete pattern fixes all job chains, so its best assignment is
//! one min-max LP. The searches differ only in which patterns they solve:
//! all of them, the feasible ones, or the feasible ones that survive
//! dominance pruning.

use std::collections::VecDeque;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearSystem, MinMaxObjective, Term, Var};
use crate::metrics::{self, FletOracle};
use crate::pattern::{
    edge_pattern_leq, enumerate_edge_patterns, realized_shift, EdgePattern, GraphPattern,
    PatternKind,
};
use crate::rta::{response_times, ResponseTimes};
use crate::sim::exact_response_times;
use crate::task::{FletAssignment, Metric, ObjectiveSpec, TaskDag, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Enumerate,
    Backtrack,
    Symbolic,
}

impl Method {
    pub fn short_name(self) -> &'static str {
        match self {
            Method::Enumerate => "enum",
            Method::Backtrack => "backtrack",
            Method::Symbolic => "symbolic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub method: Method,
    pub objective: ObjectiveSpec,
    pub time_limit: Option<Duration>,
    pub worse_capacity: usize,
}

impl SearchConfig {
    pub fn new(method: Method, objective: ObjectiveSpec) -> Self {
        Self {
            method,
            objective,
            time_limit: None,
            worse_capacity: 50,
        }
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn check(&self) -> Result<()> {
        self.objective.check()?;
        if self.worse_capacity == 0 {
            return Err(Error::InvalidConfig("worse-pattern capacity must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Complete patterns reached by the search.
    pub enumerated: u64,
    /// Feasible complete patterns solved by the search. The default-LET
    /// pattern solved before every search is not counted.
    pub evaluated: u64,
    /// LP solves on partial patterns.
    pub partial: u64,
    /// Partial or complete patterns found infeasible.
    pub infeasible: u64,
    /// Candidate patterns dropped as dominated by a stored worse pattern.
    pub dominated: u64,
    /// Partial patterns whose optimistic value could not beat the best.
    pub bound_pruned: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub method: Method,
    pub objective: ObjectiveSpec,
    pub assignment: FletAssignment,
    #[serde(skip)]
    pub pattern: GraphPattern,
    /// Enumeration index of the chosen pattern per DAG edge.
    pub pattern_indices: Vec<Option<usize>>,
    /// Sum of per-chain latencies, or of per-merge maximum disparities.
    pub value: Time,
    /// Per chain (latency objectives) or per merge (maximum disparity).
    pub per_item: Vec<Time>,
    /// Per-merge jitter; empty for latency objectives.
    pub jitter: Vec<Time>,
    /// `value` for latency objectives, `sum(TD + w * jitter)` otherwise.
    pub score: f64,
    /// Per-chain suboptimality bound `T_sink + T_source` (symbolic search only).
    pub bounds: Option<Vec<Time>>,
    pub counters: Counters,
    pub timed_out: bool,
    pub elapsed: Duration,
    pub refined: bool,
}

impl OptimizationResult {
    pub fn total_bound(&self) -> Option<Time> {
        self.bounds.as_ref().map(|b| b.iter().sum())
    }
}

/// Optimal assignment for one pattern and its per-item values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub per_item: Vec<Time>,
    pub value: Time,
    pub assignment: FletAssignment,
}

/// Precomputed per-instance search data.
pub struct Problem<'a> {
    dag: &'a TaskDag,
    r: ResponseTimes,
    metric: Metric,
    kind: PatternKind,
    /// Objective edges in search order.
    order: Vec<usize>,
    /// Enumerated patterns per DAG edge, empty for non-objective edges.
    patterns: Vec<Vec<Arc<EdgePattern>>>,
    touched: Vec<bool>,
}

impl<'a> Problem<'a> {
    pub fn new(dag: &'a TaskDag, metric: Metric) -> Result<Self> {
        let r = response_times(dag)?;
        Self::with_response_times(dag, metric, r)
    }

    pub fn with_response_times(dag: &'a TaskDag, metric: Metric, r: ResponseTimes) -> Result<Self> {
        let kind = match metric {
            Metric::ReactionTime => PatternKind::FirstReacting,
            _ => PatternKind::LastReading,
        };
        // Edge rank: earliest position in any chain (merge edges rank 0).
        let mut rank: Vec<Option<usize>> = vec![None; dag.edges().len()];
        let mut touched = vec![false; dag.len()];
        let mut bump = |e: usize, pos: usize| {
            rank[e] = Some(rank[e].map_or(pos, |r: usize| r.min(pos)));
        };
        match metric {
            Metric::DataAge | Metric::ReactionTime => {
                for c in dag.chains() {
                    for (pos, e) in dag.chain_edges(c)?.into_iter().enumerate() {
                        bump(e, pos);
                    }
                    for &t in c {
                        touched[t] = true;
                    }
                }
            }
            Metric::TimeDisparity => {
                for m in dag.merges() {
                    for &s in &m.sources {
                        bump(dag.edge(s, m.sink)?, 0);
                        touched[s] = true;
                    }
                    touched[m.sink] = true;
                }
            }
        }
        let mut order: Vec<usize> = (0..rank.len()).filter(|&e| rank[e].is_some()).collect();
        order.sort_by_key(|&e| (rank[e], e));

        let mut patterns = vec![Vec::new(); dag.edges().len()];
        for &e in &order {
            let ps = enumerate_edge_patterns(dag, e, &r, kind)?;
            if ps.is_empty() {
                return Err(Error::Infeasible);
            }
            patterns[e] = ps.into_iter().map(Arc::new).collect();
        }
        Ok(Self {
            dag,
            r,
            metric,
            kind,
            order,
            patterns,
            touched,
        })
    }

    pub fn dag(&self) -> &TaskDag {
        self.dag
    }

    pub fn response_times(&self) -> &ResponseTimes {
        &self.r
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    /// Objective edges in search order.
    pub fn edge_order(&self) -> &[usize] {
        &self.order
    }

    pub fn patterns_of(&self, edge: usize) -> &[Arc<EdgePattern>] {
        &self.patterns[edge]
    }

    /// Size of the complete-pattern space.
    pub fn space_size(&self) -> u128 {
        self.order
            .iter()
            .map(|&e| self.patterns[e].len() as u128)
            .product()
    }

    pub fn empty_pattern(&self) -> GraphPattern {
        GraphPattern::empty(self.dag, self.kind)
    }

    pub fn is_complete(&self, p: &GraphPattern) -> bool {
        p.is_complete_over(&self.order)
    }

    /// The pattern realized by `O = 0`, `D = D^org`.
    pub fn default_let_pattern(&self) -> GraphPattern {
        self.pattern_of(&FletAssignment::default_let(self.dag))
            .expect("default LET realizes a feasible shift on every edge")
    }

    /// Pattern realized by a schedulable assignment, if every objective
    /// edge's shift falls in the enumerated range.
    pub fn pattern_of(&self, a: &FletAssignment) -> Option<GraphPattern> {
        let mut g = self.empty_pattern();
        for &e in &self.order {
            let ed = self.dag.edges()[e];
            let s = realized_shift(self.dag, a, ed.producer, ed.consumer);
            let p = self.patterns[e].iter().find(|p| p.shift.contains(s))?;
            g.insert(p.clone()).ok()?;
        }
        Some(g)
    }

    /// Min-max objective with one group per chain or merge. Chains whose
    /// first edge is uncovered and merges with an uncovered source get an
    /// empty group (value 0); other chains contribute their covered
    /// source-anchored prefix.
    ///
    /// A data-age prefix only bounds the full chain from below when every
    /// job of its last task is read further down the chain. That holds when
    /// no remaining hop under-samples (consumer period at most producer
    /// period); otherwise the chain scores 0. Reaction-time prefixes follow
    /// the same source jobs as the full chain and are always bounds.
    pub fn objective(&self, p: &GraphPattern) -> MinMaxObjective {
        let mut obj = MinMaxObjective::new();
        match self.metric {
            Metric::DataAge | Metric::ReactionTime => {
                for c in self.dag.chains() {
                    obj.push_max(1, self.chain_terms(p, c));
                }
            }
            Metric::TimeDisparity => {
                for m in self.dag.merges() {
                    obj.push_max(1, self.merge_terms(p, m.sink, &m.sources));
                }
            }
        }
        obj
    }

    fn chain_terms(&self, p: &GraphPattern, chain: &[usize]) -> Vec<Term> {
        let dag = self.dag;
        let mut len = 1;
        while len < chain.len() {
            match dag.edge_index(chain[len - 1], chain[len]) {
                Some(e) if p.covers(e) => len += 1,
                _ => break,
            }
        }
        if len == 1 && chain.len() > 1 {
            return Vec::new();
        }
        let under_sampled = chain[len - 1..]
            .windows(2)
            .any(|w| dag.period(w[1]) > dag.period(w[0]));
        if self.kind == PatternKind::LastReading && under_sampled {
            return Vec::new();
        }
        let prefix = &chain[..len];
        let (src, snk) = (prefix[0], prefix[len - 1]);
        let hp = dag
            .hyper_period_of(prefix)
            .expect("chain prefixes are nonempty");
        let phi = |t: usize| dag.task(t).release_offset;
        let edge_pattern = |k: usize| {
            p.get(dag.edge_index(prefix[k - 1], prefix[k]).unwrap())
                .unwrap()
        };
        let mut terms = Vec::new();
        match self.kind {
            PatternKind::LastReading => {
                for qn in 0..hp / dag.period(snk) {
                    let mut q = qn;
                    for k in (1..len).rev() {
                        q = edge_pattern(k).partner(q);
                    }
                    let c = phi(snk) + qn * dag.period(snk) - phi(src) - q * dag.period(src);
                    terms.push(Term::diff(Var::Deadline(snk), Var::Offset(src), c));
                }
            }
            PatternKind::FirstReacting => {
                for q0 in 0..hp / dag.period(src) {
                    let mut q = q0;
                    for k in 1..len {
                        q = edge_pattern(k).partner(q);
                    }
                    let c = phi(snk) + q * dag.period(snk) - phi(src) - q0 * dag.period(src);
                    terms.push(Term::diff(Var::Deadline(snk), Var::Offset(src), c));
                }
            }
        }
        terms
    }

    fn merge_terms(&self, p: &GraphPattern, sink: usize, sources: &[usize]) -> Vec<Term> {
        let dag = self.dag;
        let mut edge_patterns = Vec::new();
        for &s in sources {
            match dag.edge_index(s, sink).and_then(|e| p.get(e)) {
                Some(ep) => edge_patterns.push(ep),
                None => return Vec::new(),
            }
        }
        let mut members = sources.to_vec();
        members.push(sink);
        let hp = dag.hyper_period_of(&members).expect("merge is nonempty");
        let mut terms = Vec::new();
        for q in 0..hp / dag.period(sink) {
            // Write instant minus D of each source's last-reading job.
            let base: Vec<Time> = sources
                .iter()
                .zip(&edge_patterns)
                .map(|(&s, ep)| dag.task(s).release_offset + ep.partner(q) * dag.period(s))
                .collect();
            for a in 0..sources.len() {
                for b in 0..sources.len() {
                    if a != b {
                        terms.push(Term::diff(
                            Var::Deadline(sources[a]),
                            Var::Deadline(sources[b]),
                            base[a] - base[b],
                        ));
                    }
                }
            }
        }
        terms
    }

    /// Best assignment under a possibly partial pattern, or `None` if the
    /// pattern is infeasible.
    pub fn evaluate(&self, p: &GraphPattern) -> Option<Evaluation> {
        self.evaluate_with(p, p.constraints(self.dag, &self.r))
    }

    fn evaluate_with(&self, p: &GraphPattern, system: LinearSystem) -> Option<Evaluation> {
        let obj = self.objective(p);
        match lp::solve_min_max(&system, &obj) {
            Ok(sol) => {
                let per_item: Vec<Time> = obj.groups.iter().map(|g| g.eval(&sol.witness)).collect();
                Some(Evaluation {
                    value: sol.value,
                    per_item,
                    assignment: self.normalize(sol.witness.assignment()),
                })
            }
            Err(Error::Infeasible) => None,
            Err(e) => panic!("objective over a bounded system cannot fail: {e}"),
        }
    }

    /// Resets tasks outside every chain or merge to default LET.
    fn normalize(&self, mut a: FletAssignment) -> FletAssignment {
        for i in 0..self.dag.len() {
            if !self.touched[i] {
                a.offsets[i] = 0;
                a.deadlines[i] = self.dag.task(i).deadline;
            }
        }
        a
    }

    /// Realized per-merge `(max TD, jitter)` under an assignment.
    pub fn realized_disparity(&self, a: &FletAssignment) -> Vec<(Time, Time)> {
        let oracle = FletOracle::new(self.dag, a);
        self.dag
            .merges()
            .iter()
            .map(|m| {
                let d = metrics::time_disparity(self.dag, m, &oracle).expect("merge is nonempty");
                (d.max, d.jitter)
            })
            .collect()
    }

    /// `W` is at least as good as `P` on every edge `W` assigns, where `P`
    /// is `base` with `edge` set to `candidate`.
    fn dominated_by(
        &self,
        base: &GraphPattern,
        edge: usize,
        candidate: &EdgePattern,
        worse: &GraphPattern,
    ) -> bool {
        worse.patterns().all(|w| {
            let mine = if w.edge == edge {
                Some(candidate)
            } else {
                base.get(w.edge)
            };
            match mine {
                None => false,
                Some(m) => match self.kind {
                    PatternKind::LastReading => edge_pattern_leq(m, w).unwrap_or(false),
                    PatternKind::FirstReacting => edge_pattern_leq(w, m).unwrap_or(false),
                },
            }
        })
    }
}

/// Elementwise `a >= b`.
fn dominates_elementwise(a: &[Time], b: &[Time]) -> bool {
    a.iter().zip(b).all(|(x, y)| x >= y)
}

struct Search<'p, 'a> {
    problem: &'p Problem<'a>,
    config: &'p SearchConfig,
    start: Instant,
    counters: Counters,
    timed_out: bool,
    best: Option<(Evaluation, GraphPattern, f64, Vec<Time>)>,
    worse: VecDeque<GraphPattern>,
}

impl<'p, 'a> Search<'p, 'a> {
    fn new(problem: &'p Problem<'a>, config: &'p SearchConfig) -> Self {
        Self {
            problem,
            config,
            start: Instant::now(),
            counters: Counters::default(),
            timed_out: false,
            best: None,
            worse: VecDeque::new(),
        }
    }

    fn out_of_time(&mut self) -> bool {
        if let Some(limit) = self.config.time_limit {
            if self.start.elapsed() > limit {
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    fn best_per_item(&self) -> Option<&[Time]> {
        self.best.as_ref().map(|b| b.0.per_item.as_slice())
    }

    /// Solves a complete pattern and keeps it if its score strictly improves.
    fn complete(&mut self, p: &GraphPattern) -> Option<Evaluation> {
        let Some(ev) = self.problem.evaluate(p) else {
            self.counters.infeasible += 1;
            return None;
        };
        self.counters.evaluated += 1;
        let (score, jitter) = if self.problem.metric == Metric::TimeDisparity {
            let realized = self.problem.realized_disparity(&ev.assignment);
            let w = self.config.objective.jitter_weight;
            let score = realized.iter().map(|&(td, j)| td as f64 + w * j as f64).sum();
            (score, realized.iter().map(|&(_, j)| j).collect())
        } else {
            (ev.value as f64, Vec::new())
        };
        let better = self.best.as_ref().is_none_or(|b| score < b.2);
        if better {
            log::debug!("new best {score} after {} evaluations", self.counters.evaluated);
            self.best = Some((ev.clone(), p.clone(), score, jitter));
        }
        Some(ev)
    }

    fn push_worse(&mut self, p: GraphPattern) {
        self.worse.push_back(p);
        if self.worse.len() > self.config.worse_capacity {
            self.worse.pop_front();
        }
    }

    fn enumerate(&mut self) {
        let order = self.problem.order.clone();
        let sizes: Vec<usize> = order.iter().map(|&e| self.problem.patterns[e].len()).collect();
        let mut idx = vec![0usize; order.len()];
        loop {
            if self.out_of_time() {
                return;
            }
            let mut p = self.problem.empty_pattern();
            for (k, &e) in order.iter().enumerate() {
                p.insert(self.problem.patterns[e][idx[k]].clone()).unwrap();
            }
            self.counters.enumerated += 1;
            self.complete(&p);
            // Odometer increment, last edge fastest.
            let mut k = order.len();
            loop {
                if k == 0 {
                    return;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < sizes[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    fn backtrack(&mut self, p: &mut GraphPattern, depth: usize) {
        let order = &self.problem.order;
        if depth == order.len() {
            self.counters.enumerated += 1;
            self.complete(p);
            return;
        }
        let e = order[depth];
        for cand in self.problem.patterns[e].clone() {
            if self.out_of_time() {
                return;
            }
            p.insert(cand).unwrap();
            if lp::feasibility(&p.constraints(self.problem.dag, &self.problem.r)).is_some() {
                self.backtrack(p, depth + 1);
            } else {
                self.counters.infeasible += 1;
            }
            p.erase(e);
        }
    }

    fn symbolic(&mut self, p: &mut GraphPattern, depth: usize) {
        let order = &self.problem.order;
        let e = order[depth];
        let mut candidates: VecDeque<Arc<EdgePattern>> = self.problem.patterns[e].iter().cloned().collect();
        loop {
            self.remove_worse(p, e, &mut candidates);
            let Some(cand) = candidates.pop_front() else {
                return;
            };
            if self.out_of_time() {
                return;
            }
            p.insert(cand).unwrap();
            if self.problem.is_complete(p) {
                self.counters.enumerated += 1;
                if let Some(ev) = self.complete(p) {
                    if dominates_elementwise(&ev.per_item, self.best_per_item().unwrap()) {
                        self.push_worse(p.clone());
                    }
                }
            } else {
                self.counters.partial += 1;
                match self.problem.evaluate(p) {
                    None => self.counters.infeasible += 1,
                    Some(ev) => {
                        let hopeless = self
                            .best_per_item()
                            .is_some_and(|b| dominates_elementwise(&ev.per_item, b));
                        if hopeless {
                            self.counters.bound_pruned += 1;
                            self.push_worse(p.clone());
                        } else {
                            self.symbolic(p, depth + 1);
                        }
                    }
                }
            }
            p.erase(e);
        }
    }

    fn remove_worse(&mut self, p: &GraphPattern, edge: usize, candidates: &mut VecDeque<Arc<EdgePattern>>) {
        let before = candidates.len();
        candidates.retain(|c| !self.worse.iter().any(|w| self.problem.dominated_by(p, edge, c, w)));
        self.counters.dominated += (before - candidates.len()) as u64;
    }
}

/// Runs the configured search.
pub fn optimize(dag: &TaskDag, config: &SearchConfig) -> Result<OptimizationResult> {
    config.check()?;
    let problem = Problem::new(dag, config.objective.metric)?;
    optimize_problem(&problem, config)
}

pub fn optimize_problem(problem: &Problem<'_>, config: &SearchConfig) -> Result<OptimizationResult> {
    config.check()?;
    let metric = config.objective.metric;
    if metric == Metric::TimeDisparity && config.method == Method::Symbolic {
        return Err(Error::UnsupportedObjective(
            "symbolic search applies to data age and reaction time only",
        ));
    }
    if metric != problem.metric {
        return Err(Error::InvalidConfig(
            "problem was prepared for a different metric".into(),
        ));
    }
    let mut search = Search::new(problem, config);
    let default = problem.default_let_pattern();
    search.complete(&default);
    search.counters.evaluated = 0;
    if !problem.order.is_empty() {
        let mut p = problem.empty_pattern();
        match (metric, config.method) {
            (Metric::TimeDisparity, _) | (_, Method::Backtrack) => search.backtrack(&mut p, 0),
            (_, Method::Enumerate) => search.enumerate(),
            (_, Method::Symbolic) => {
                search.push_worse(default);
                search.symbolic(&mut p, 0)
            }
        }
    }
    let c = search.counters;
    log::info!(
        "{} {}: evaluated {} complete / {} partial, enumerated {}, infeasible {}, dominated {}, bound-pruned {}, {:.3}s{}",
        config.method.short_name(),
        metric.short_name(),
        c.evaluated,
        c.partial,
        c.enumerated,
        c.infeasible,
        c.dominated,
        c.bound_pruned,
        search.start.elapsed().as_secs_f64(),
        if search.timed_out { " (time limit)" } else { "" }
    );
    let (ev, pattern, score, jitter) = search.best.expect("default LET pattern is feasible");
    let bounds = (config.method == Method::Symbolic && metric.is_dart()).then(|| {
        problem
            .dag
            .chains()
            .iter()
            .map(|ch| problem.dag.period(ch[0]) + problem.dag.period(*ch.last().unwrap()))
            .collect()
    });
    Ok(OptimizationResult {
        method: config.method,
        objective: config.objective,
        assignment: ev.assignment,
        pattern_indices: pattern.indices(),
        pattern,
        value: ev.value,
        per_item: ev.per_item,
        jitter,
        score,
        bounds,
        counters: search.counters,
        timed_out: search.timed_out,
        elapsed: search.start.elapsed(),
        refined: false,
    })
}

pub fn optimize_enumerate(dag: &TaskDag, objective: ObjectiveSpec) -> Result<OptimizationResult> {
    optimize(dag, &SearchConfig::new(Method::Enumerate, objective))
}

pub fn optimize_backtrack(dag: &TaskDag, objective: ObjectiveSpec) -> Result<OptimizationResult> {
    optimize(dag, &SearchConfig::new(Method::Backtrack, objective))
}

pub fn optimize_symbolic(dag: &TaskDag, objective: ObjectiveSpec) -> Result<OptimizationResult> {
    if !objective.metric.is_dart() {
        return Err(Error::UnsupportedObjective(
            "symbolic search applies to data age and reaction time only",
        ));
    }
    optimize(dag, &SearchConfig::new(Method::Symbolic, objective))
}

/// Backtracking over merge-edge patterns scored by realized disparity and
/// jitter.
pub fn optimize_td_jitter(dag: &TaskDag, jitter_weight: f64) -> Result<OptimizationResult> {
    optimize(
        dag,
        &SearchConfig::new(Method::Backtrack, ObjectiveSpec::time_disparity(jitter_weight)),
    )
}

/// Second step: with the offsets fixed, re-solves the winning pattern
/// against offset-aware response times from simulation. The result is
/// kept only if it strictly improves the score.
pub fn refine(dag: &TaskDag, result: &OptimizationResult) -> Result<OptimizationResult> {
    let exact = ResponseTimes(exact_response_times(dag, &result.assignment.offsets)?);
    let problem = Problem::new(dag, result.objective.metric)?;
    let mut system = result.pattern.constraints(dag, &exact);
    for (i, &o) in result.assignment.offsets.iter().enumerate() {
        system.lower(Var::Offset(i), o);
        system.upper(Var::Offset(i), o);
    }
    let Some(ev) = problem.evaluate_with(&result.pattern, system) else {
        return Ok(result.clone());
    };
    let (score, jitter) = if result.objective.metric == Metric::TimeDisparity {
        let realized = problem.realized_disparity(&ev.assignment);
        let w = result.objective.jitter_weight;
        (
            realized.iter().map(|&(td, j)| td as f64 + w * j as f64).sum(),
            realized.iter().map(|&(_, j)| j).collect(),
        )
    } else {
        (ev.value as f64, Vec::new())
    };
    if score >= result.score {
        return Ok(result.clone());
    }
    let mut out = result.clone();
    out.assignment = ev.assignment;
    out.value = ev.value;
    out.per_item = ev.per_item;
    out.jitter = jitter;
    out.score = score;
    out.refined = true;
    Ok(out)
}
