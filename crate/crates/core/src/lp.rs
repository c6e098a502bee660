//! Exact feasibility and sum-of-max minimization over systems of
//! difference constraints on the virtual offsets and deadlines.
//!
//! Feasibility is a negative-cycle test on the constraint graph. A
//! sum-of-max objective whose groups each reduce to a single difference
//! `x - y + c` is solved through its dual, a min-cost flow on the same
//! graph, whose node potentials give an integral optimal witness. A lone
//! group over several pairs is bisected on its level with repeated
//! feasibility tests. Anything else goes through an exact rational simplex
//! with one auxiliary variable per group, followed by branch-and-bound
//! when the vertex is fractional.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::task::{FletAssignment, Time};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Offset(usize),
    Deadline(usize),
    Aux(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `x - y <= bound`
    Diff { x: Var, y: Var, bound: Time },
    /// `var <= bound`
    Upper { var: Var, bound: Time },
    /// `var >= bound`
    Lower { var: Var, bound: Time },
}

/// Variables for `tasks` offsets and deadlines plus any auxiliaries, and
/// the constraints over them.
#[derive(Debug, Clone, Default)]
pub struct LinearSystem {
    tasks: usize,
    aux: usize,
    constraints: Vec<Constraint>,
}

/// Graph node of the reference variable fixed at 0.
const ZERO: usize = 0;

impl LinearSystem {
    pub fn new(tasks: usize) -> Self {
        Self {
            tasks,
            aux: 0,
            constraints: Vec::new(),
        }
    }

    pub fn tasks(&self) -> usize {
        self.tasks
    }

    pub fn add_aux(&mut self) -> Var {
        self.aux += 1;
        Var::Aux(self.aux - 1)
    }

    pub fn push(&mut self, c: Constraint) {
        self.check_var(match c {
            Constraint::Diff { x, y, .. } => {
                self.check_var(y);
                x
            }
            Constraint::Upper { var, .. } | Constraint::Lower { var, .. } => var,
        });
        self.constraints.push(c);
    }

    pub fn diff(&mut self, x: Var, y: Var, bound: Time) {
        self.push(Constraint::Diff { x, y, bound });
    }

    pub fn upper(&mut self, var: Var, bound: Time) {
        self.push(Constraint::Upper { var, bound });
    }

    pub fn lower(&mut self, var: Var, bound: Time) {
        self.push(Constraint::Lower { var, bound });
    }

    pub fn extend(&mut self, other: &LinearSystem) {
        for &c in &other.constraints {
            self.push(c);
        }
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn check_var(&self, v: Var) {
        let ok = match v {
            Var::Offset(i) | Var::Deadline(i) => i < self.tasks,
            Var::Aux(k) => k < self.aux,
        };
        assert!(ok, "variable {v:?} not declared in this system");
    }

    fn nodes(&self) -> usize {
        1 + 2 * self.tasks + self.aux
    }

    fn node(&self, v: Var) -> usize {
        match v {
            Var::Offset(i) => 1 + 2 * i,
            Var::Deadline(i) => 2 + 2 * i,
            Var::Aux(k) => 1 + 2 * self.tasks + k,
        }
    }

    fn opt_node(&self, v: Option<Var>) -> usize {
        v.map_or(ZERO, |v| self.node(v))
    }

    /// Arcs `(u, v, c)` encoding `x_v - x_u <= c`.
    fn arcs(&self) -> Vec<(usize, usize, Time)> {
        self.constraints
            .iter()
            .map(|c| match *c {
                Constraint::Diff { x, y, bound } => (self.node(y), self.node(x), bound),
                Constraint::Upper { var, bound } => (ZERO, self.node(var), bound),
                Constraint::Lower { var, bound } => (self.node(var), ZERO, -bound),
            })
            .collect()
    }

    pub fn is_satisfied_by(&self, w: &Witness) -> bool {
        self.constraints.iter().all(|c| match *c {
            Constraint::Diff { x, y, bound } => w.get(x) - w.get(y) <= bound,
            Constraint::Upper { var, bound } => w.get(var) <= bound,
            Constraint::Lower { var, bound } => w.get(var) >= bound,
        })
    }
}

/// Integral values for every variable of a system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    tasks: usize,
    /// Indexed by graph node; entry 0 is the zero reference.
    values: Vec<Time>,
}

impl Witness {
    pub fn get(&self, v: Var) -> Time {
        let node = match v {
            Var::Offset(i) => 1 + 2 * i,
            Var::Deadline(i) => 2 + 2 * i,
            Var::Aux(k) => 1 + 2 * self.tasks + k,
        };
        self.values[node]
    }

    pub fn assignment(&self) -> FletAssignment {
        FletAssignment {
            offsets: (0..self.tasks).map(|i| self.get(Var::Offset(i))).collect(),
            deadlines: (0..self.tasks).map(|i| self.get(Var::Deadline(i))).collect(),
        }
    }

    fn from_potentials(tasks: usize, pot: &[Time]) -> Self {
        let z = pot[ZERO];
        Self {
            tasks,
            values: pot.iter().map(|p| p - z).collect(),
        }
    }
}

/// `plus - minus + constant`; a missing variable reads as 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub plus: Option<Var>,
    pub minus: Option<Var>,
    pub constant: Time,
}

impl Term {
    pub fn new(plus: Option<Var>, minus: Option<Var>, constant: Time) -> Self {
        Self {
            plus,
            minus,
            constant,
        }
    }

    pub fn diff(plus: Var, minus: Var, constant: Time) -> Self {
        Self::new(Some(plus), Some(minus), constant)
    }

    pub fn eval(&self, w: &Witness) -> Time {
        self.plus.map_or(0, |v| w.get(v)) - self.minus.map_or(0, |v| w.get(v)) + self.constant
    }

    fn negated(&self) -> Self {
        Self::new(self.minus, self.plus, -self.constant)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    /// Contributes `weight * max(terms)`.
    Max,
    /// Contributes `-weight * min(terms)`.
    NegMin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub kind: GroupKind,
    pub weight: Time,
    pub terms: Vec<Term>,
}

impl Group {
    pub fn eval(&self, w: &Witness) -> Time {
        let vals = self.terms.iter().map(|t| t.eval(w));
        match self.kind {
            GroupKind::Max => vals.max().map_or(0, |m| self.weight * m),
            GroupKind::NegMin => vals.min().map_or(0, |m| -self.weight * m),
        }
    }

    /// Same value as a `Max` group.
    fn as_max(&self) -> (Time, Vec<Term>) {
        match self.kind {
            GroupKind::Max => (self.weight, self.terms.clone()),
            GroupKind::NegMin => (self.weight, self.terms.iter().map(Term::negated).collect()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MinMaxObjective {
    pub groups: Vec<Group>,
}

impl MinMaxObjective {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_max(&mut self, weight: Time, terms: Vec<Term>) {
        self.groups.push(Group {
            kind: GroupKind::Max,
            weight,
            terms,
        });
    }

    pub fn push_neg_min(&mut self, weight: Time, terms: Vec<Term>) {
        self.groups.push(Group {
            kind: GroupKind::NegMin,
            weight,
            terms,
        });
    }

    pub fn eval(&self, w: &Witness) -> Time {
        self.groups.iter().map(|g| g.eval(w)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    pub value: Time,
    pub witness: Witness,
}

/// Bellman-Ford from a virtual source joined to every node at cost 0.
/// Returns potentials, or `None` on a negative cycle.
fn bellman_ford(n: usize, arcs: &[(usize, usize, Time)]) -> Option<Vec<Time>> {
    let mut dist = vec![0; n];
    for round in 0..=n {
        let mut changed = false;
        for &(u, v, c) in arcs {
            if dist[u] + c < dist[v] {
                dist[v] = dist[u] + c;
                changed = true;
            }
        }
        if !changed {
            return Some(dist);
        }
        if round == n {
            break;
        }
    }
    None
}

/// Integral witness of the constraint conjunction, or `None` if infeasible.
pub fn feasibility(system: &LinearSystem) -> Option<Witness> {
    bellman_ford(system.nodes(), &system.arcs())
        .map(|pot| Witness::from_potentials(system.tasks, &pot))
}

/// Minimizes the objective subject to the system.
pub fn solve_min_max(system: &LinearSystem, objective: &MinMaxObjective) -> Result<Solution> {
    if feasibility(system).is_none() {
        return Err(Error::Infeasible);
    }
    if let Some((supply, constant)) = single_pair_groups(system, objective) {
        return solve_flow(system, &supply, constant, objective);
    }
    let nonempty: Vec<&Group> = objective.groups.iter().filter(|g| !g.terms.is_empty()).collect();
    if let [g] = nonempty[..] {
        if g.weight > 0 {
            return solve_single_group(system, g, objective);
        }
    }
    solve_min_max_simplex(system, objective)
}

/// One group `w * max_k (x_p - x_m + c_k)`: the smallest integer `t` for
/// which `x_p - x_m <= t - c_k` stays feasible, by bisection.
fn solve_single_group(
    system: &LinearSystem,
    group: &Group,
    objective: &MinMaxObjective,
) -> Result<Solution> {
    let (_, terms) = group.as_max();
    let base = system.arcs();
    let with_level = |t: Time| -> Option<Vec<Time>> {
        let mut arcs = base.clone();
        for term in &terms {
            let (p, m) = (system.opt_node(term.plus), system.opt_node(term.minus));
            if p == m {
                if term.constant > t {
                    return None;
                }
            } else {
                arcs.push((m, p, t - term.constant));
            }
        }
        bellman_ford(system.nodes(), &arcs)
    };
    // Any feasible point bounds the optimum from above; grow the lower
    // end until infeasible.
    let start = feasibility(system).ok_or(Error::Infeasible)?;
    let mut hi = terms.iter().map(|t| t.eval(&start)).max().expect("nonempty group");
    let mut step: Time = 1;
    let mut lo = hi - step;
    while with_level(lo).is_some() {
        hi = lo;
        step = step.checked_mul(2).ok_or(Error::Unbounded)?;
        lo = hi.checked_sub(step).ok_or(Error::Unbounded)?;
    }
    // Invariant: `lo` infeasible, `hi` feasible.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if with_level(mid).is_some() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let pot = with_level(hi).expect("upper level is feasible");
    let witness = Witness::from_potentials(system.tasks, &pot);
    debug_assert!(system.is_satisfied_by(&witness));
    Ok(Solution {
        value: objective.eval(&witness),
        witness,
    })
}

/// Collapses every group to one `(plus, minus, max constant)` difference
/// and accumulates node supplies. `None` if some group spans several
/// variable pairs.
fn single_pair_groups(
    system: &LinearSystem,
    objective: &MinMaxObjective,
) -> Option<(Vec<Time>, Time)> {
    let mut supply = vec![0; system.nodes()];
    let mut constant = 0;
    for g in &objective.groups {
        let (w, terms) = g.as_max();
        let mut pairs: BTreeMap<(usize, usize), Time> = BTreeMap::new();
        for t in &terms {
            let (p, m) = (system.opt_node(t.plus), system.opt_node(t.minus));
            let key = if p == m { (ZERO, ZERO) } else { (p, m) };
            let e = pairs.entry(key).or_insert(t.constant);
            *e = (*e).max(t.constant);
        }
        match pairs.len() {
            0 => {}
            1 => {
                let (&(p, m), &c) = pairs.iter().next().unwrap();
                supply[p] += w;
                supply[m] -= w;
                constant += w * c;
            }
            _ => return None,
        }
    }
    Some((supply, constant))
}

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: Time,
    cost: Time,
    rev: usize,
}

const INF_CAP: Time = Time::MAX / 4;

/// Minimizes `sum supply_v x_v + constant` via successive shortest paths on
/// the dual min-cost flow: send `supply_v` units out of every node
/// (`ZERO` balances), arc `u -> v` of cost `c` per constraint
/// `x_v - x_u <= c`. Optimal potentials of the residual graph are the
/// primal witness.
fn solve_flow(
    system: &LinearSystem,
    supply: &[Time],
    constant: Time,
    objective: &MinMaxObjective,
) -> Result<Solution> {
    let n = system.nodes();
    let (src, sink) = (n, n + 1);
    let mut g: Vec<Vec<Arc>> = vec![Vec::new(); n + 2];
    let add = |g: &mut Vec<Vec<Arc>>, u: usize, v: usize, cap: Time, cost: Time| {
        let (ru, rv) = (g[v].len(), g[u].len());
        g[u].push(Arc {
            to: v,
            cap,
            cost,
            rev: ru,
        });
        g[v].push(Arc {
            to: u,
            cap: 0,
            cost: -cost,
            rev: rv,
        });
    };
    for (u, v, c) in system.arcs() {
        add(&mut g, u, v, INF_CAP, c);
    }
    let zero_supply: Time = -supply[1..].iter().sum::<Time>();
    let mut need = 0;
    for v in 0..n {
        let b = if v == ZERO { zero_supply } else { supply[v] };
        if b > 0 {
            add(&mut g, src, v, b, 0);
            need += b;
        } else if b < 0 {
            add(&mut g, v, sink, -b, 0);
        }
    }

    let mut cost_total: Time = 0;
    while need > 0 {
        let (dist, prev) = spfa(&g, src);
        if dist[sink] == Time::MAX {
            return Err(Error::Unbounded);
        }
        let mut push = need;
        let mut v = sink;
        while v != src {
            let (u, k) = prev[v];
            push = push.min(g[u][k].cap);
            v = u;
        }
        let mut v = sink;
        while v != src {
            let (u, k) = prev[v];
            g[u][k].cap -= push;
            let r = g[u][k].rev;
            g[v][r].cap += push;
            v = u;
        }
        cost_total += push * dist[sink];
        need -= push;
    }

    let residual: Vec<(usize, usize, Time)> = (0..n)
        .flat_map(|u| {
            g[u].iter()
                .filter(|a| a.to < n && a.cap > 0)
                .map(move |a| (u, a.to, a.cost))
        })
        .collect();
    let pot = bellman_ford(n, &residual).expect("optimal residual graph has no negative cycle");
    let witness = Witness::from_potentials(system.tasks, &pot);
    let value = objective.eval(&witness);
    debug_assert_eq!(value, constant - cost_total);
    debug_assert!(system.is_satisfied_by(&witness));
    Ok(Solution { value, witness })
}

/// Queue-based Bellman-Ford over arcs with residual capacity.
fn spfa(g: &[Vec<Arc>], src: usize) -> (Vec<Time>, Vec<(usize, usize)>) {
    let n = g.len();
    let mut dist = vec![Time::MAX; n];
    let mut prev = vec![(usize::MAX, 0); n];
    let mut queued = vec![false; n];
    let mut q = VecDeque::from([src]);
    dist[src] = 0;
    queued[src] = true;
    while let Some(u) = q.pop_front() {
        queued[u] = false;
        for (k, a) in g[u].iter().enumerate() {
            if a.cap > 0 && dist[u] + a.cost < dist[a.to] {
                dist[a.to] = dist[u] + a.cost;
                prev[a.to] = (u, k);
                if !queued[a.to] {
                    queued[a.to] = true;
                    q.push_back(a.to);
                }
            }
        }
    }
    (dist, prev)
}

type Q = BigRational;

fn q(v: Time) -> Q {
    Q::from_integer(BigInt::from(v))
}

enum LpOutcome {
    Optimal { y: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

/// Two-phase dense simplex for `min c.y  s.t.  A y <= b, y >= 0` with
/// Bland's rule.
fn simplex(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let negative: Vec<usize> = (0..m).filter(|&i| b[i].is_negative()).collect();
    let width = n + m + negative.len();
    let rhs = width;
    let mut t: Vec<Vec<Q>> = Vec::with_capacity(m + 1);
    let mut basis = vec![0usize; m];
    let mut art = n + m;
    for i in 0..m {
        let mut row = vec![Q::zero(); width + 1];
        let flip = b[i].is_negative();
        for j in 0..n {
            row[j] = if flip { -a[i][j].clone() } else { a[i][j].clone() };
        }
        row[n + i] = if flip { -Q::one() } else { Q::one() };
        row[rhs] = if flip { -b[i].clone() } else { b[i].clone() };
        if flip {
            row[art] = Q::one();
            basis[i] = art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
        t.push(row);
    }

    let mut allowed = vec![true; width];
    let cost1: Vec<Q> = (0..width)
        .map(|j| if j >= n + m { Q::one() } else { Q::zero() })
        .collect();
    t.push(reduced_costs(&t, &basis, &cost1));
    if !negative.is_empty() {
        if let Pivoting::Unbounded = run(&mut t, &mut basis, &allowed) {
            unreachable!("phase one is bounded below by zero");
        }
        if t[m][rhs].is_negative() {
            return LpOutcome::Infeasible;
        }
        // Drive zero-valued artificials out of the basis.
        let mut i = 0;
        while i < basis.len() {
            if basis[i] >= n + m {
                match (0..n + m).find(|&j| !t[i][j].is_zero()) {
                    Some(j) => pivot(&mut t, &mut basis, i, j),
                    None => {
                        t.remove(i);
                        basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for flag in allowed.iter_mut().skip(n + m) {
            *flag = false;
        }
    }

    let cost2: Vec<Q> = (0..width)
        .map(|j| if j < n { c[j].clone() } else { Q::zero() })
        .collect();
    let rows = basis.len();
    t.truncate(rows);
    t.push(reduced_costs(&t, &basis, &cost2));
    if let Pivoting::Unbounded = run(&mut t, &mut basis, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut y = vec![Q::zero(); n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            y[j] = t[i][rhs].clone();
        }
    }
    let value = -t[rows][rhs].clone();
    LpOutcome::Optimal { y, value }
}

fn reduced_costs(t: &[Vec<Q>], basis: &[usize], cost: &[Q]) -> Vec<Q> {
    let width = cost.len();
    let mut d: Vec<Q> = cost.to_vec();
    d.push(Q::zero());
    for (i, &bj) in basis.iter().enumerate() {
        let cb = &cost[bj];
        if cb.is_zero() {
            continue;
        }
        for j in 0..=width {
            d[j] -= cb * &t[i][j];
        }
    }
    d
}

enum Pivoting {
    Optimal,
    Unbounded,
}

fn run(t: &mut [Vec<Q>], basis: &mut [usize], allowed: &[bool]) -> Pivoting {
    let m = basis.len();
    let rhs = allowed.len();
    loop {
        let Some(col) = (0..rhs).find(|&j| allowed[j] && t[m][j].is_negative()) else {
            return Pivoting::Optimal;
        };
        let mut best: Option<(usize, Q)> = None;
        for i in 0..m {
            if t[i][col].is_positive() {
                let ratio = &t[i][rhs] / &t[i][col];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && basis[i] < basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
        }
        match best {
            None => return Pivoting::Unbounded,
            Some((row, _)) => pivot(t, basis, row, col),
        }
    }
}

fn pivot(t: &mut [Vec<Q>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col].clone();
    for v in t[row].iter_mut() {
        *v /= &p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row || r[col].is_zero() {
            continue;
        }
        let f = r[col].clone();
        for (v, pv) in r.iter_mut().zip(&pivot_row) {
            if !pv.is_zero() {
                *v -= &f * pv;
            }
        }
    }
    basis[row] = col;
}

/// Dense LP in split-variable form: node `v >= 1` is `y[2(v-1)] - y[2(v-1)+1]`,
/// and group `g`'s auxiliary follows the node variables likewise.
struct DenseLp {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    cost: Vec<Q>,
    nodes: usize,
}

impl DenseLp {
    fn width(&self) -> usize {
        self.cost.len()
    }

    fn row(&mut self, coeffs: &[(usize, Time)], bound: Time) {
        let mut r = vec![Q::zero(); self.width()];
        for &(var, k) in coeffs {
            r[2 * var] += q(k);
            r[2 * var + 1] -= q(k);
        }
        self.rows.push(r);
        self.rhs.push(q(bound));
    }

    /// Value of split variable `var`.
    fn value(y: &[Q], var: usize) -> Q {
        &y[2 * var] - &y[2 * var + 1]
    }
}

/// Minimizes the objective with the generic simplex route, one auxiliary
/// per group, and branch-and-bound until the witness is integral.
pub fn solve_min_max_simplex(
    system: &LinearSystem,
    objective: &MinMaxObjective,
) -> Result<Solution> {
    let nodes = system.nodes();
    // Split variables: nodes 1..n map to index v-1, then one per group.
    let groups: Vec<(Time, Vec<Term>)> = objective
        .groups
        .iter()
        .filter(|g| !g.terms.is_empty())
        .map(Group::as_max)
        .collect();
    let vars = nodes - 1 + groups.len();
    let mut lp = DenseLp {
        rows: Vec::new(),
        rhs: Vec::new(),
        cost: vec![Q::zero(); 2 * vars],
        nodes,
    };
    let idx = |node: usize| node - 1;
    for (u, v, c) in system.arcs() {
        let mut coeffs = Vec::new();
        if v != ZERO {
            coeffs.push((idx(v), 1));
        }
        if u != ZERO {
            coeffs.push((idx(u), -1));
        }
        if coeffs.is_empty() {
            if c < 0 {
                return Err(Error::Infeasible);
            }
            continue;
        }
        lp.row(&coeffs, c);
    }
    for (k, (w, terms)) in groups.iter().enumerate() {
        let aux = nodes - 1 + k;
        lp.cost[2 * aux] = q(*w);
        lp.cost[2 * aux + 1] = -q(*w);
        for t in terms {
            let mut coeffs = vec![(aux, -1)];
            let (p, m) = (system.opt_node(t.plus), system.opt_node(t.minus));
            if p != m {
                if p != ZERO {
                    coeffs.push((idx(p), 1));
                }
                if m != ZERO {
                    coeffs.push((idx(m), -1));
                }
            }
            lp.row(&coeffs, -t.constant);
        }
    }

    let mut best: Option<(Q, Vec<Time>)> = None;
    branch(&mut lp, &mut best)?;
    let (_, values) = best.ok_or(Error::Infeasible)?;
    let mut pot = vec![0; nodes];
    pot[1..].copy_from_slice(&values[..nodes - 1]);
    let witness = Witness::from_potentials(system.tasks, &pot);
    debug_assert!(system.is_satisfied_by(&witness));
    Ok(Solution {
        value: objective.eval(&witness),
        witness,
    })
}

fn branch(lp: &mut DenseLp, best: &mut Option<(Q, Vec<Time>)>) -> Result<()> {
    let (y, value) = match simplex(&lp.rows, &lp.rhs, &lp.cost) {
        LpOutcome::Optimal { y, value } => (y, value),
        LpOutcome::Infeasible => return Ok(()),
        LpOutcome::Unbounded => return Err(Error::Unbounded),
    };
    // Integer weights on integer points give integer objectives.
    if let Some((incumbent, _)) = best {
        if value.ceil() >= *incumbent {
            return Ok(());
        }
    }
    let node_vars = lp.nodes - 1;
    let values: Vec<Q> = (0..node_vars).map(|v| DenseLp::value(&y, v)).collect();
    match values.iter().position(|x| !x.is_integer()) {
        None => {
            let ints = values
                .iter()
                .map(|x| x.to_integer().to_i64().expect("witness fits in i64"))
                .collect();
            *best = Some((value, ints));
        }
        Some(v) => {
            let x = &values[v];
            let floor = x.floor().to_integer().to_i64().expect("bound fits in i64");
            for (coeff, bound) in [(1, floor), (-1, -(floor + 1))] {
                lp.row(&[(v, coeff)], bound);
                let r = branch(lp, best);
                lp.rows.pop();
                lp.rhs.pop();
                r?;
            }
        }
    }
    Ok(())
}
