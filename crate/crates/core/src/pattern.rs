//! Edge and graph communication patterns.
//!
//! For an edge `i -> j` the shift `s = (phi_j + O_j) - (phi_i + D_i)`
//! alone decides which producer job every consumer job reads (last-reading
//! patterns) or which consumer job first sees every producer write
//! (first-reacting patterns). Job maps only change at multiples of
//! `gcd(T_i, T_j)`, so each edge has finitely many patterns inside its
//! feasible shift range.

use std::fmt::{self, Write as _};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearSystem, Var};
use crate::rta::ResponseTimes;
use crate::task::{gcd, FletAssignment, TaskDag, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKind {
    LastReading,
    FirstReacting,
}

impl PatternKind {
    pub fn short_name(self) -> &'static str {
        match self {
            PatternKind::LastReading => "ELP",
            PatternKind::FirstReacting => "EFP",
        }
    }
}

/// Half-open integer interval `[lo, hi)` of the shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftInterval {
    pub lo: Time,
    pub hi: Time,
}

impl ShiftInterval {
    pub fn contains(&self, s: Time) -> bool {
        self.lo <= s && s < self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo >= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgePattern {
    /// Edge index in the DAG.
    pub edge: usize,
    pub producer: usize,
    pub consumer: usize,
    pub kind: PatternKind,
    /// Position in the enumeration order of this edge.
    pub index: usize,
    /// Last-reading: consumer job `q_j` in `[0, H/T_j)` to producer index.
    /// First-reacting: producer job `q_i` in `[0, H/T_i)` to consumer index.
    pub job_map: Vec<i64>,
    /// Jobs of the partner task per super-period.
    pub partner_jobs: i64,
    pub shift: ShiftInterval,
}

impl EdgePattern {
    /// A pattern with an arbitrary job map and no realizing shift.
    pub fn imaginary(
        edge: usize,
        producer: usize,
        consumer: usize,
        kind: PatternKind,
        job_map: Vec<i64>,
        partner_jobs: i64,
    ) -> Self {
        Self {
            edge,
            producer,
            consumer,
            kind,
            index: usize::MAX,
            job_map,
            partner_jobs,
            shift: ShiftInterval { lo: 0, hi: 0 },
        }
    }

    /// Partner job of job `q` of the mapped task, extended periodically.
    pub fn partner(&self, q: i64) -> i64 {
        let n = self.job_map.len() as i64;
        self.job_map[q.rem_euclid(n) as usize] + q.div_euclid(n) * self.partner_jobs
    }

    /// Task whose jobs index the job map.
    pub fn mapped_task(&self) -> usize {
        match self.kind {
            PatternKind::LastReading => self.consumer,
            PatternKind::FirstReacting => self.producer,
        }
    }

    /// `(producer q, consumer q)` pairs over one super-period.
    pub fn job_pairs(&self) -> Vec<(i64, i64)> {
        self.job_map
            .iter()
            .enumerate()
            .map(|(q, &p)| match self.kind {
                PatternKind::LastReading => (p, q as i64),
                PatternKind::FirstReacting => (q as i64, p),
            })
            .collect()
    }

    /// Adds `lo <= (phi_j + O_j) - (phi_i + D_i) < hi` to the system.
    pub fn encode(&self, dag: &TaskDag, system: &mut LinearSystem) {
        let phase = dag.task(self.consumer).release_offset - dag.task(self.producer).release_offset;
        let (o, d) = (Var::Offset(self.consumer), Var::Deadline(self.producer));
        system.diff(o, d, self.shift.hi - 1 - phase);
        system.diff(d, o, phase - self.shift.lo);
    }
}

impl fmt::Display for EdgePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (i, j) = (self.producer, self.consumer);
        write!(
            f,
            "{}(E{}#{}): D_{i}{:+} <= O_{j} <= D_{i}{:+} |",
            self.kind.short_name(),
            self.edge,
            self.index,
            self.shift.lo,
            self.shift.hi - 1
        )?;
        for (k, (qi, qj)) in self.job_pairs().into_iter().enumerate() {
            let sep = if k == 0 { " " } else { ", " };
            write!(f, "{sep}J({i},{qi})->J({j},{qj})")?;
        }
        Ok(())
    }
}

/// Closed range of shifts compatible with the schedulability constraints
/// of both endpoints, including release offsets.
pub fn feasible_shift_range(
    dag: &TaskDag,
    producer: usize,
    consumer: usize,
    r: &ResponseTimes,
) -> (Time, Time) {
    let (ti, tj) = (dag.task(producer), dag.task(consumer));
    let phase = tj.release_offset - ti.release_offset;
    (
        phase - ti.deadline,
        phase + tj.deadline - r.get(consumer) - r.get(producer),
    )
}

fn floor_div(a: Time, b: Time) -> Time {
    a.div_euclid(b)
}

fn ceil_div(a: Time, b: Time) -> Time {
    -((-a).div_euclid(b))
}

/// Job map realized by shift `s` on edge `producer -> consumer`.
pub fn job_map_at(dag: &TaskDag, producer: usize, consumer: usize, kind: PatternKind, s: Time) -> Vec<i64> {
    let (ti, tj) = (dag.period(producer), dag.period(consumer));
    let g = gcd(ti, tj);
    match kind {
        PatternKind::LastReading => (0..ti / g).map(|q| floor_div(s + q * tj, ti)).collect(),
        PatternKind::FirstReacting => (0..tj / g).map(|q| ceil_div(q * ti - s, tj)).collect(),
    }
}

/// Every nonempty pattern of `edge`, highest shift first.
pub fn enumerate_edge_patterns(
    dag: &TaskDag,
    edge: usize,
    r: &ResponseTimes,
    kind: PatternKind,
) -> Result<Vec<EdgePattern>> {
    let e = *dag.edges().get(edge).ok_or(Error::UnknownEdgeIndex(edge))?;
    let (i, j) = (e.producer, e.consumer);
    let (ti, tj) = (dag.period(i), dag.period(j));
    let g = gcd(ti, tj);
    let (lo, hi) = feasible_shift_range(dag, i, j, r);
    if lo > hi {
        return Ok(Vec::new());
    }
    let partner_jobs = match kind {
        PatternKind::LastReading => tj / g,
        PatternKind::FirstReacting => ti / g,
    };
    let patterns = (floor_div(lo, g)..=floor_div(hi, g))
        .rev()
        .enumerate()
        .map(|(index, k)| EdgePattern {
            edge,
            producer: i,
            consumer: j,
            kind,
            index,
            job_map: job_map_at(dag, i, j, kind, k * g),
            partner_jobs,
            shift: ShiftInterval {
                lo: (k * g).max(lo),
                hi: ((k + 1) * g).min(hi + 1),
            },
        })
        .collect();
    Ok(patterns)
}

/// Every job-map entry of `a` is at most the matching entry of `b`.
pub fn edge_pattern_leq(a: &EdgePattern, b: &EdgePattern) -> Result<bool> {
    if a.edge != b.edge || a.kind != b.kind || a.job_map.len() != b.job_map.len() {
        return Err(Error::Incomparable("patterns of different edges or kinds"));
    }
    Ok(a.job_map.iter().zip(&b.job_map).all(|(x, y)| x <= y))
}

/// Edge-to-pattern assignment, possibly partial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphPattern {
    kind: PatternKind,
    slots: Vec<Option<Arc<EdgePattern>>>,
}

impl GraphPattern {
    pub fn empty(dag: &TaskDag, kind: PatternKind) -> Self {
        Self {
            kind,
            slots: vec![None; dag.edges().len()],
        }
    }

    pub fn from_patterns(
        dag: &TaskDag,
        kind: PatternKind,
        patterns: impl IntoIterator<Item = EdgePattern>,
    ) -> Result<Self> {
        let mut g = Self::empty(dag, kind);
        for p in patterns {
            g.insert(Arc::new(p))?;
        }
        Ok(g)
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    pub fn insert(&mut self, p: Arc<EdgePattern>) -> Result<()> {
        if p.kind != self.kind {
            return Err(Error::Incomparable("pattern kind differs from graph pattern"));
        }
        let slot = self.slots.get_mut(p.edge).ok_or(Error::UnknownEdgeIndex(p.edge))?;
        *slot = Some(p);
        Ok(())
    }

    pub fn erase(&mut self, edge: usize) {
        self.slots[edge] = None;
    }

    pub fn get(&self, edge: usize) -> Option<&EdgePattern> {
        self.slots.get(edge).and_then(|s| s.as_deref())
    }

    pub fn covers(&self, edge: usize) -> bool {
        self.get(edge).is_some()
    }

    pub fn covered_edges(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .map(|(e, _)| e)
    }

    pub fn patterns(&self) -> impl Iterator<Item = &EdgePattern> {
        self.slots.iter().flatten().map(|p| p.as_ref())
    }

    pub fn len(&self) -> usize {
        self.slots.iter().flatten().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Every edge in `edges` is assigned.
    pub fn is_complete_over(&self, edges: &[usize]) -> bool {
        edges.iter().all(|&e| self.covers(e))
    }

    /// Enumeration index per edge, `None` where uncovered.
    pub fn indices(&self) -> Vec<Option<usize>> {
        self.slots.iter().map(|s| s.as_ref().map(|p| p.index)).collect()
    }

    /// Pattern constraints plus schedulability of every task.
    pub fn constraints(&self, dag: &TaskDag, r: &ResponseTimes) -> LinearSystem {
        let mut s = schedulability_system(dag, r);
        for p in self.patterns() {
            p.encode(dag, &mut s);
        }
        s
    }

    /// Human-readable pattern table in enumeration-row format.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for p in self.patterns() {
            let _ = writeln!(out, "{p}");
        }
        out
    }
}

/// `0 <= O_i`, `O_i + R_i <= D_i`, `D_i <= D_i^org` for every task.
pub fn schedulability_system(dag: &TaskDag, r: &ResponseTimes) -> LinearSystem {
    let mut s = LinearSystem::new(dag.len());
    for i in 0..dag.len() {
        s.lower(Var::Offset(i), 0);
        s.diff(Var::Offset(i), Var::Deadline(i), -r.get(i));
        s.upper(Var::Deadline(i), dag.task(i).deadline);
    }
    s
}

/// Elementwise comparison over an identical edge set.
pub fn graph_pattern_leq(a: &GraphPattern, b: &GraphPattern) -> Result<bool> {
    if a.kind != b.kind {
        return Err(Error::Incomparable("graph patterns of different kinds"));
    }
    if a.indices().iter().map(Option::is_some).ne(b.indices().iter().map(Option::is_some)) {
        return Err(Error::Incomparable("graph patterns over different edge sets"));
    }
    for (x, y) in a.patterns().zip(b.patterns()) {
        if !edge_pattern_leq(x, y)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every edge assigned in `inner` is assigned identically in `outer`.
pub fn contains(inner: &GraphPattern, outer: &GraphPattern) -> bool {
    inner.kind == outer.kind
        && inner
            .slots
            .iter()
            .zip(&outer.slots)
            .all(|(a, b)| match (a, b) {
                (None, _) => true,
                (Some(a), Some(b)) => a.job_map == b.job_map,
                (Some(_), None) => false,
            })
}

/// Whether the pattern admits a schedulable assignment, with a witness.
pub fn feasible(dag: &TaskDag, p: &GraphPattern, r: &ResponseTimes) -> Option<FletAssignment> {
    lp::feasibility(&p.constraints(dag, r)).map(|w| w.assignment())
}

/// Realized shift of an edge under an assignment.
pub fn realized_shift(dag: &TaskDag, a: &FletAssignment, producer: usize, consumer: usize) -> Time {
    let (ti, tj) = (dag.task(producer), dag.task(consumer));
    (tj.release_offset + a.offsets[consumer]) - (ti.release_offset + a.deadlines[producer])
}

/// Table of every edge's enumerated patterns.
pub fn pattern_table(dag: &TaskDag, r: &ResponseTimes, kind: PatternKind) -> Result<String> {
    let mut out = String::new();
    for e in 0..dag.edges().len() {
        for p in enumerate_edge_patterns(dag, e, r, kind)? {
            let _ = writeln!(out, "{p}");
        }
    }
    Ok(out)
}
