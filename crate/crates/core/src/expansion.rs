// SPDX-License-Identifier: MIT
//! Iterative graph expansion: the working-state queue, its min-cut priority, edge
//! selection and the search for primary adjustment sets.
//!
//! A working state tracks a candidate adjustment set `s` together with a partition of the
//! vertex pairs over `s ∪ {x, y}` into kept (`b_yes`), absent (`b_no`) and uncertain
//! (everything else) bidirected edges. A state whose uncertain and kept edges no longer
//! join `x` to `y` satisfies the district criterion and is emitted; one where kept edges
//! alone join them is discarded.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adjustment::VertexSetFamily;
use crate::graph::{canonical_pair, is_identifier, VertexSet};
use crate::oracle::{validate_answer, Answer, Oracle, OracleError, Query};
use crate::session::{EventPayload, FinishStatus, SessionEvent};

/// An unordered vertex pair, smaller name first.
pub type Pair = (String, String);

/// Builds a canonical [`Pair`].
pub fn pair(a: &str, b: &str) -> Pair {
    let (p, q) = canonical_pair(a, b);
    (p.to_string(), q.to_string())
}

/// A node of the expansion search.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkingState {
    pub s: VertexSet,
    pub b_yes: BTreeSet<Pair>,
    pub b_no: BTreeSet<Pair>,
}

impl WorkingState {
    /// `s ∪ {x, y}`.
    pub fn closure(&self, x: &str, y: &str) -> VertexSet {
        let mut v = self.s.clone();
        v.insert(x.to_string());
        v.insert(y.to_string());
        v
    }

    /// Pairs over `s ∪ {x, y}` that are neither kept nor absent, in canonical order.
    pub fn uncertain(&self, x: &str, y: &str) -> Vec<Pair> {
        let verts: Vec<String> = self.closure(x, y).into_iter().collect();
        let mut out = Vec::new();
        for i in 0..verts.len() {
            for j in i + 1..verts.len() {
                let p = (verts[i].clone(), verts[j].clone());
                if !self.b_yes.contains(&p) && !self.b_no.contains(&p) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// A min-cut value: a finite count or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MinCut {
    Finite(usize),
    Infinite,
}

impl fmt::Display for MinCut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinCut::Finite(k) => write!(f, "{k}"),
            MinCut::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for MinCut {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            MinCut::Finite(k) => ser.serialize_u64(*k as u64),
            MinCut::Infinite => ser.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for MinCut {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(k) => Ok(MinCut::Finite(k as usize)),
            Raw::Text(t) if t == "inf" => Ok(MinCut::Infinite),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid min-cut `{t}`"))),
        }
    }
}

/// How the next uncertain edge is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// An edge on some minimum cut, nearest to the outcome.
    #[default]
    MinCutClosestToY,
    /// The first uncertain pair in canonical order.
    FirstUncertain,
}

/// What the primary-set search does with an observed common cause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CauseBranching {
    /// Branch on adding the cause and on each set of mediators that cuts it off, so that
    /// every minimal primary set is reachable.
    #[default]
    CauseAndMediators,
    /// Only add the cause itself; mediators are sought for unobserved causes alone.
    ObservedCauseOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionConfig {
    pub minimal_only: bool,
    pub strategy: Strategy,
    pub cause_branching: CauseBranching,
    pub max_states: usize,
    pub max_vertices: usize,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig {
            minimal_only: true,
            strategy: Strategy::MinCutClosestToY,
            cause_branching: CauseBranching::CauseAndMediators,
            max_states: 10_000,
            max_vertices: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpansionError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("treatment and outcome must differ")]
    SameEndpoints,
    #[error("invalid vertex name `{0}`")]
    InvalidName(String),
    #[error("no uncertain edge left to select")]
    NoUncertainEdge,
    #[error("recursion depth exceeded {0}")]
    DepthExceeded(usize),
}

/// The outcome of an expansion run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpansionResult {
    /// Emitted sets in order of first discovery, without repeats.
    pub discovered: Vec<VertexSet>,
    /// The same sets as a canonical family.
    pub sufficient_sets: VertexSetFamily,
    pub trace: Vec<SessionEvent>,
    /// False when a state or vertex cap stopped the search early.
    pub exhausted: bool,
    pub pops: usize,
}

impl ExpansionResult {
    pub fn minimal_sets(&self) -> VertexSetFamily {
        self.sufficient_sets.minimal_members()
    }

    /// Min-cut values of popped states, in pop order.
    pub fn mincut_sequence(&self) -> Vec<MinCut> {
        self.trace
            .iter()
            .filter_map(|e| match &e.payload {
                EventPayload::StatePopped { mincut, .. } => Some(*mincut),
                _ => None,
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Min-cut machinery
// ---------------------------------------------------------------------------

/// Undirected flow network over `s ∪ {x, y}` for a working state.
struct CutNetwork {
    n: usize,
    x: usize,
    y: usize,
    names: Vec<String>,
    /// Capacity per unordered pair: 1 for uncertain, `big` for kept, absent for blocked.
    cap: Vec<Vec<usize>>,
    big: usize,
}

impl CutNetwork {
    fn new(state: &WorkingState, x: &str, y: &str) -> Self {
        let names: Vec<String> = state.closure(x, y).into_iter().collect();
        let n = names.len();
        let pos = |v: &str| names.iter().position(|m| m == v).expect("member");
        let big = n * n + 1;
        let mut cap = vec![vec![0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let p = (names[i].clone(), names[j].clone());
                let c = if state.b_yes.contains(&p) {
                    big
                } else if state.b_no.contains(&p) {
                    0
                } else {
                    1
                };
                cap[i][j] = c;
                cap[j][i] = c;
            }
        }
        CutNetwork {
            n,
            x: pos(x),
            y: pos(y),
            names,
            cap,
            big,
        }
    }

    fn index(&self, v: &str) -> usize {
        self.names.iter().position(|m| m == v).expect("member")
    }

    /// Maximum x–y flow by shortest augmenting paths.
    fn max_flow(&self) -> usize {
        let mut residual = self.cap.clone();
        let mut flow = 0;
        loop {
            let mut prev = vec![usize::MAX; self.n];
            prev[self.x] = self.x;
            let mut queue = VecDeque::from([self.x]);
            while let Some(u) = queue.pop_front() {
                for v in 0..self.n {
                    if prev[v] == usize::MAX && residual[u][v] > 0 {
                        prev[v] = u;
                        queue.push_back(v);
                    }
                }
            }
            if prev[self.y] == usize::MAX {
                return flow;
            }
            let mut bottleneck = usize::MAX;
            let mut v = self.y;
            while v != self.x {
                let u = prev[v];
                bottleneck = bottleneck.min(residual[u][v]);
                v = u;
            }
            let mut v = self.y;
            while v != self.x {
                let u = prev[v];
                residual[u][v] -= bottleneck;
                residual[v][u] += bottleneck;
                v = u;
            }
            flow += bottleneck;
            if flow >= self.big {
                return flow;
            }
        }
    }

    fn min_cut(&self) -> MinCut {
        let f = self.max_flow();
        if f >= self.big {
            MinCut::Infinite
        } else {
            MinCut::Finite(f)
        }
    }

    /// Hop distance to `y` over pairs that are not blocked.
    fn distances_to_y(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[self.y] = 0;
        let mut queue = VecDeque::from([self.y]);
        while let Some(u) = queue.pop_front() {
            for v in 0..self.n {
                if dist[v] == usize::MAX && self.cap[u][v] > 0 {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// The minimum number of uncertain edges whose removal separates `x` from `y`, using
/// uncertain and kept edges; infinite when kept edges alone connect them.
pub fn min_cut_index(state: &WorkingState, x: &str, y: &str) -> MinCut {
    CutNetwork::new(state, x, y).min_cut()
}

/// Chooses the next uncertain edge to resolve.
pub fn select_edge(
    state: &WorkingState,
    x: &str,
    y: &str,
    strategy: Strategy,
) -> Result<Pair, ExpansionError> {
    let uncertain = state.uncertain(x, y);
    if uncertain.is_empty() {
        return Err(ExpansionError::NoUncertainEdge);
    }
    if strategy == Strategy::FirstUncertain {
        return Ok(uncertain[0].clone());
    }
    let net = CutNetwork::new(state, x, y);
    let MinCut::Finite(k) = net.min_cut() else {
        return Ok(uncertain[0].clone());
    };
    if k == 0 {
        return Ok(uncertain[0].clone());
    }
    // An edge lies on some minimum cut exactly when deleting it lowers the flow by one.
    let on_cut: Vec<&Pair> = uncertain
        .iter()
        .filter(|p| {
            let mut reduced = state.clone();
            reduced.b_no.insert((*p).clone());
            min_cut_index(&reduced, x, y) == MinCut::Finite(k - 1)
        })
        .collect();
    let dist = net.distances_to_y();
    let edge_dist = |p: &Pair| dist[net.index(&p.0)].min(dist[net.index(&p.1)]);
    let best = on_cut
        .iter()
        .map(|p| edge_dist(p))
        .min()
        .expect("a positive finite cut has edges");
    // Remaining ties go to the lexicographically greatest pair.
    Ok(on_cut
        .into_iter()
        .filter(|p| edge_dist(p) == best)
        .max()
        .expect("non-empty")
        .clone())
}

// ---------------------------------------------------------------------------
// Oracle plumbing shared by the drivers
// ---------------------------------------------------------------------------

/// Records events and memoises oracle answers for one run.
struct Run<'o, 'f> {
    oracle: &'o mut dyn Oracle,
    events: Vec<SessionEvent>,
    observer: Option<&'f mut dyn FnMut(&SessionEvent)>,
    memo: HashMap<Query, Answer>,
    next_query: u64,
}

impl<'o, 'f> Run<'o, 'f> {
    fn new(oracle: &'o mut dyn Oracle, observer: Option<&'f mut dyn FnMut(&SessionEvent)>) -> Self {
        Run {
            oracle,
            events: Vec::new(),
            observer,
            memo: HashMap::new(),
            next_query: 0,
        }
    }

    fn emit(&mut self, payload: EventPayload) {
        let event = SessionEvent {
            seq: self.events.len() as u64 + 1,
            payload,
        };
        if let Some(obs) = self.observer.as_mut() {
            obs(&event);
        }
        self.events.push(event);
    }

    fn ask(&mut self, query: Query) -> Result<Answer, ExpansionError> {
        if let Some(a) = self.memo.get(&query) {
            return Ok(a.clone());
        }
        self.next_query += 1;
        let id = self.next_query;
        self.emit(EventPayload::QueryIssued {
            id,
            query: query.clone(),
        });
        let answer = self.oracle.answer(&query)?;
        validate_answer(&query, &answer)?;
        self.emit(EventPayload::AnswerReceived {
            id,
            answer: answer.clone(),
        });
        self.memo.insert(query, answer.clone());
        Ok(answer)
    }
}

impl Asker for Run<'_, '_> {
    fn ask(&mut self, query: Query) -> Result<Answer, ExpansionError> {
        Run::ask(self, query)
    }
}

/// Minimal interface the primary-set search needs from its caller.
trait Asker {
    fn ask(&mut self, query: Query) -> Result<Answer, ExpansionError>;

    fn common_cause(
        &mut self,
        a: &str,
        b: &str,
        given: &VertexSet,
    ) -> Result<Option<String>, ExpansionError> {
        match self.ask(Query::CommonCause {
            a: a.to_string(),
            b: b.to_string(),
            given: given.clone(),
        })? {
            Answer::CommonCause { cause } => Ok(cause),
            _ => unreachable!("answers are validated against their query"),
        }
    }

    fn is_observed(&mut self, v: &str) -> Result<bool, ExpansionError> {
        match self.ask(Query::IsObserved {
            vertex: v.to_string(),
        })? {
            Answer::IsObserved { observed } => Ok(observed),
            _ => unreachable!("answers are validated against their query"),
        }
    }

    fn find_mediator(
        &mut self,
        a: &str,
        b: &str,
        cause: &str,
        base: &VertexSet,
    ) -> Result<VertexSetFamily, ExpansionError> {
        match self.ask(Query::FindMediator {
            a: a.to_string(),
            b: b.to_string(),
            cause: cause.to_string(),
            base: base.clone(),
        })? {
            Answer::FindMediator { sets } => Ok(sets),
            _ => unreachable!("answers are validated against their query"),
        }
    }
}

struct Direct<'o> {
    oracle: &'o mut dyn Oracle,
}

impl Asker for Direct<'_> {
    fn ask(&mut self, query: Query) -> Result<Answer, ExpansionError> {
        let answer = self.oracle.answer(&query)?;
        validate_answer(&query, &answer)?;
        Ok(answer)
    }
}

// ---------------------------------------------------------------------------
// Primary adjustment sets
// ---------------------------------------------------------------------------

/// Options for [`find_primary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PrimaryOptions {
    pub minimal_only: bool,
    pub cause_branching: CauseBranching,
}

/// Primary sets in the order the search produced them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PrimarySets {
    pub discovered: Vec<VertexSet>,
}

impl PrimarySets {
    pub fn family(&self) -> VertexSetFamily {
        VertexSetFamily::from_sets(self.discovered.iter().cloned())
    }

    pub fn contains_empty(&self) -> bool {
        self.discovered.iter().any(VertexSet::is_empty)
    }
}

/// Searches for primary adjustment sets for `(a, b)` relative to `base` by repeatedly
/// asking for an unblocked common cause and branching on ways to block it.
///
/// Candidate sets are explored smallest first, the most recently added first among equal
/// sizes; each candidate is explored once.
pub fn find_primary(
    oracle: &mut dyn Oracle,
    a: &str,
    b: &str,
    base: &VertexSet,
    options: PrimaryOptions,
) -> Result<PrimarySets, ExpansionError> {
    primary_search(&mut Direct { oracle }, a, b, base, options)
}

fn primary_search(
    asker: &mut dyn Asker,
    a: &str,
    b: &str,
    base: &VertexSet,
    options: PrimaryOptions,
) -> Result<PrimarySets, ExpansionError> {
    let mut queue: BTreeMap<(usize, Reverse<u64>), VertexSet> = BTreeMap::new();
    let mut seen: HashSet<VertexSet> = HashSet::new();
    let mut pushes = 0u64;
    let mut push = |queue: &mut BTreeMap<(usize, Reverse<u64>), VertexSet>, t: VertexSet| {
        if seen.insert(t.clone()) {
            pushes += 1;
            queue.insert((t.len(), Reverse(pushes)), t);
        }
    };
    push(&mut queue, base.clone());

    let mut out = PrimarySets::default();
    while let Some((_, t)) = queue.pop_first() {
        match asker.common_cause(a, b, &t)? {
            None => {
                let mut found: VertexSet = t.difference(base).cloned().collect();
                if options.minimal_only {
                    for z in found.clone() {
                        let mut trial = found.clone();
                        trial.remove(&z);
                        let given: VertexSet = base.union(&trial).cloned().collect();
                        if asker.common_cause(a, b, &given)?.is_none() {
                            found = trial;
                        }
                    }
                }
                if !out.discovered.contains(&found) {
                    out.discovered.push(found);
                }
            }
            Some(c) => {
                let observed = asker.is_observed(&c)?;
                if observed {
                    let mut next = t.clone();
                    next.insert(c.clone());
                    push(&mut queue, next);
                }
                if !observed || options.cause_branching == CauseBranching::CauseAndMediators {
                    for m in asker.find_mediator(a, b, &c, &t)?.iter() {
                        let next: VertexSet = t.union(m).cloned().collect();
                        push(&mut queue, next);
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

fn check_endpoints(x: &str, y: &str) -> Result<(), ExpansionError> {
    for v in [x, y] {
        if !is_identifier(v) {
            return Err(ExpansionError::InvalidName(v.to_string()));
        }
    }
    if x == y {
        return Err(ExpansionError::SameEndpoints);
    }
    Ok(())
}

/// What to do with a state after resolving its selected edge.
struct Resolution {
    pair: Pair,
    /// States to push, expansions first and the keep-state last.
    children: Vec<WorkingState>,
    /// Some expansion exceeded the vertex cap and was dropped.
    capped: bool,
}

fn resolve(
    run: &mut Run<'_, '_>,
    state: &WorkingState,
    x: &str,
    y: &str,
    config: &ExpansionConfig,
) -> Result<Resolution, ExpansionError> {
    let pair = select_edge(state, x, y, config.strategy)?;
    run.emit(EventPayload::EdgeSelected { pair: pair.clone() });
    let (a, b) = (&pair.0, &pair.1);
    let mut base = state.closure(x, y);
    base.remove(a);
    base.remove(b);
    let options = PrimaryOptions {
        minimal_only: config.minimal_only,
        cause_branching: config.cause_branching,
    };
    let found = primary_search(run, a, b, &base, options)?;

    let mut children = Vec::new();
    let mut capped = false;
    let mut blocked = state.clone();
    blocked.b_no.insert(pair.clone());
    if found.contains_empty() {
        children.push(blocked);
    } else {
        for c in &found.discovered {
            let mut next = blocked.clone();
            next.s.extend(c.iter().cloned());
            if next.closure(x, y).len() > config.max_vertices {
                capped = true;
                continue;
            }
            children.push(next);
        }
        let mut keep = state.clone();
        keep.b_yes.insert(pair.clone());
        children.push(keep);
    }
    Ok(Resolution {
        pair,
        children,
        capped,
    })
}

/// Runs the queue-based expansion.
///
/// States are popped by lowest min-cut. Ties go to the most recent batch of pushes, and
/// within a batch to the earlier push, so expansions come before the keep-state in the
/// order the primary-set search found them.
pub fn confounder_select(
    oracle: &mut dyn Oracle,
    x: &str,
    y: &str,
    config: &ExpansionConfig,
) -> Result<ExpansionResult, ExpansionError> {
    confounder_select_observed(oracle, x, y, config, None)
}

/// As [`confounder_select`], additionally handing each event to `observer` as it happens.
pub fn confounder_select_observed(
    oracle: &mut dyn Oracle,
    x: &str,
    y: &str,
    config: &ExpansionConfig,
    observer: Option<&mut dyn FnMut(&SessionEvent)>,
) -> Result<ExpansionResult, ExpansionError> {
    check_endpoints(x, y)?;
    oracle.begin(x, y)?;
    let mut run = Run::new(oracle, observer);

    type Key = (MinCut, Reverse<u64>, usize);
    let mut queue: BTreeMap<Key, WorkingState> = BTreeMap::new();
    let mut pushed: HashSet<WorkingState> = HashSet::new();
    let mut discovered: Vec<VertexSet> = Vec::new();
    let mut exhausted = true;
    let mut pops = 0usize;
    let mut batch = 0u64;

    let initial = WorkingState::default();
    let mc = min_cut_index(&initial, x, y);
    run.emit(EventPayload::StatePushed {
        state: initial.clone(),
        mincut: mc,
    });
    pushed.insert(initial.clone());
    queue.insert((mc, Reverse(batch), 0), initial);

    while let Some(((mincut, _, _), state)) = queue.pop_first() {
        if pops >= config.max_states {
            exhausted = false;
            break;
        }
        pops += 1;
        run.emit(EventPayload::StatePopped {
            state: state.clone(),
            mincut,
        });
        match mincut {
            MinCut::Infinite => continue,
            MinCut::Finite(0) => {
                run.emit(EventPayload::SetEmitted {
                    set: state.s.clone(),
                });
                if !discovered.contains(&state.s) {
                    discovered.push(state.s.clone());
                }
                continue;
            }
            MinCut::Finite(_) => {}
        }
        let resolution = resolve(&mut run, &state, x, y, config)?;
        if resolution.capped {
            exhausted = false;
        }
        batch += 1;
        for (i, child) in resolution.children.into_iter().enumerate() {
            if !pushed.insert(child.clone()) {
                continue;
            }
            let mc = min_cut_index(&child, x, y);
            run.emit(EventPayload::StatePushed {
                state: child.clone(),
                mincut: mc,
            });
            queue.insert((mc, Reverse(batch), i), child);
        }
        let _ = resolution.pair;
    }

    run.emit(EventPayload::Finished {
        status: if exhausted {
            FinishStatus::Completed
        } else {
            FinishStatus::Capped
        },
    });
    Ok(ExpansionResult {
        sufficient_sets: VertexSetFamily::from_sets(discovered.iter().cloned()),
        discovered,
        trace: run.events,
        exhausted,
        pops,
    })
}

/// Depth-first variant: every state is resolved completely, children in push order,
/// before its siblings. A state reached a second time is not expanded again, so both
/// variants explore the same set of states.
pub fn confounder_select_recursive(
    oracle: &mut dyn Oracle,
    x: &str,
    y: &str,
    config: &ExpansionConfig,
) -> Result<ExpansionResult, ExpansionError> {
    check_endpoints(x, y)?;
    oracle.begin(x, y)?;
    let mut run = Run::new(oracle, None);
    let mut walk = Recursion {
        x,
        y,
        config,
        discovered: Vec::new(),
        visited: HashSet::new(),
        pops: 0,
        exhausted: true,
    };
    walk.expand(&mut run, WorkingState::default(), 0)?;
    run.emit(EventPayload::Finished {
        status: if walk.exhausted {
            FinishStatus::Completed
        } else {
            FinishStatus::Capped
        },
    });
    Ok(ExpansionResult {
        sufficient_sets: VertexSetFamily::from_sets(walk.discovered.iter().cloned()),
        discovered: walk.discovered,
        trace: run.events,
        exhausted: walk.exhausted,
        pops: walk.pops,
    })
}

struct Recursion<'a> {
    x: &'a str,
    y: &'a str,
    config: &'a ExpansionConfig,
    discovered: Vec<VertexSet>,
    visited: HashSet<WorkingState>,
    pops: usize,
    exhausted: bool,
}

impl Recursion<'_> {
    fn expand(
        &mut self,
        run: &mut Run<'_, '_>,
        state: WorkingState,
        depth: usize,
    ) -> Result<(), ExpansionError> {
        if self.pops >= self.config.max_states {
            self.exhausted = false;
            return Ok(());
        }
        // Each resolution moves one pair out of the uncertain set, so depth is bounded by
        // the number of pairs over the vertex cap.
        let depth_cap = self.config.max_vertices * self.config.max_vertices;
        if depth > depth_cap {
            return Err(ExpansionError::DepthExceeded(depth_cap));
        }
        self.pops += 1;
        let mincut = min_cut_index(&state, self.x, self.y);
        run.emit(EventPayload::StatePopped {
            state: state.clone(),
            mincut,
        });
        match mincut {
            MinCut::Infinite => return Ok(()),
            MinCut::Finite(0) => {
                run.emit(EventPayload::SetEmitted {
                    set: state.s.clone(),
                });
                if !self.discovered.contains(&state.s) {
                    self.discovered.push(state.s);
                }
                return Ok(());
            }
            MinCut::Finite(_) => {}
        }
        let resolution = resolve(run, &state, self.x, self.y, self.config)?;
        if resolution.capped {
            self.exhausted = false;
        }
        for child in resolution.children {
            if self.visited.insert(child.clone()) {
                self.expand(run, child, depth + 1)?;
            }
        }
        Ok(())
    }
}
