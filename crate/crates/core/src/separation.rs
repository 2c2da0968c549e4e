// SPDX-License-Identifier: MIT
//! Connection relations between two vertices given a conditioning set.
//!
//! The decision procedure is a reachability search over `(vertex, incoming mark)` states
//! using walk blocking: a collider must itself be conditioned on and a non-collider must
//! not be. Endpoints are entered only once. A brute-force simple-path enumerator with
//! ancestral blocking is provided as an independent cross-check.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Admg, GraphError, VertexSet};

/// Largest graph accepted by [`enumerate_unblocked_paths`].
pub const PATH_ENUMERATION_LIMIT: usize = 12;

/// The four connection relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    /// A directed path `a -> ... -> b` with no conditioned intermediate.
    Directed,
    /// A collider-free path with arrowheads into both endpoints.
    ConfArc,
    /// A path with arrowheads into both endpoints; colliders allowed.
    ConfPath,
    /// Any m-connecting path.
    MConn,
}

impl ConnectionKind {
    pub const ALL: [ConnectionKind; 4] = [
        ConnectionKind::Directed,
        ConnectionKind::ConfArc,
        ConnectionKind::ConfPath,
        ConnectionKind::MConn,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SeparationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("endpoints must differ (got `{0}` twice)")]
    SameEndpoints(String),
    #[error("endpoint `{0}` is in the conditioning set")]
    EndpointConditioned(String),
    #[error("path enumeration is limited to {limit} vertices, graph has {actual}")]
    TooLarge { limit: usize, actual: usize },
}

fn check_endpoints(
    g: &Admg,
    a: &str,
    b: &str,
    c: &VertexSet,
) -> Result<(usize, usize), SeparationError> {
    let ia = g.require(a)?;
    let ib = g.require(b)?;
    g.indices(c)?;
    if ia == ib {
        return Err(SeparationError::SameEndpoints(a.to_string()));
    }
    for e in [a, b] {
        if c.contains(e) {
            return Err(SeparationError::EndpointConditioned(e.to_string()));
        }
    }
    Ok((ia, ib))
}

/// Decides whether `a` and `b` are connected by a path of the given kind given `c`.
pub fn connected(
    g: &Admg,
    kind: ConnectionKind,
    a: &str,
    b: &str,
    c: &VertexSet,
) -> Result<bool, SeparationError> {
    let (ia, ib) = check_endpoints(g, a, b, c)?;
    let cond = g.mask(c)?;
    Ok(reach(g, kind, ia, ib, &cond))
}

/// Endpoint and collider rules for a walk search.
#[derive(Debug, Clone, Copy)]
pub(crate) struct WalkRule {
    /// The first edge must point into the start vertex.
    pub head_at_start: bool,
    /// The last edge must point into the end vertex.
    pub head_at_end: bool,
    /// Conditioned colliders may be passed.
    pub colliders: bool,
}

impl WalkRule {
    fn for_kind(kind: ConnectionKind) -> WalkRule {
        match kind {
            ConnectionKind::ConfArc => WalkRule {
                head_at_start: true,
                head_at_end: true,
                colliders: false,
            },
            ConnectionKind::ConfPath => WalkRule {
                head_at_start: true,
                head_at_end: true,
                colliders: true,
            },
            _ => WalkRule {
                head_at_start: false,
                head_at_end: false,
                colliders: true,
            },
        }
    }
}

/// Index-level reachability used by the rest of the crate.
///
/// `cond` must not contain `a` or `b`.
pub(crate) fn reach(g: &Admg, kind: ConnectionKind, a: usize, b: usize, cond: &[bool]) -> bool {
    if kind == ConnectionKind::Directed {
        return directed_reach(g, a, b, cond);
    }
    walk_reach(g, WalkRule::for_kind(kind), a, b, cond)
}

pub(crate) fn walk_reach(g: &Admg, rule: WalkRule, a: usize, b: usize, cond: &[bool]) -> bool {
    let n = g.len();
    // visited[v][head_in]
    let mut visited = vec![[false; 2]; n];
    let mut queue: VecDeque<(usize, bool)> = VecDeque::new();

    // Arrival at `w`; `head_in` tells whether the edge points into `w`.
    // Returns true when the walk is complete.
    let mut arrive = |w: usize, head_in: bool, queue: &mut VecDeque<(usize, bool)>| -> bool {
        if w == b {
            return head_in || !rule.head_at_end;
        }
        if w == a {
            return false;
        }
        let slot = &mut visited[w][head_in as usize];
        if !*slot {
            *slot = true;
            queue.push_back((w, head_in));
        }
        false
    };

    for &p in g.parents_of(a) {
        if arrive(p, false, &mut queue) {
            return true;
        }
    }
    for &s in g.spouses_of(a) {
        if arrive(s, true, &mut queue) {
            return true;
        }
    }
    if !rule.head_at_start {
        for &ch in g.children_of(a) {
            if arrive(ch, true, &mut queue) {
                return true;
            }
        }
    }

    while let Some((v, head_in)) = queue.pop_front() {
        let conditioned = cond[v];
        // Leaving through a tail at v: v is a non-collider.
        if !conditioned {
            for &ch in g.children_of(v) {
                if arrive(ch, true, &mut queue) {
                    return true;
                }
            }
        }
        // Leaving through an arrowhead at v: collider iff we also arrived with one.
        let pass = if head_in {
            rule.colliders && conditioned
        } else {
            !conditioned
        };
        if pass {
            for &p in g.parents_of(v) {
                if arrive(p, false, &mut queue) {
                    return true;
                }
            }
            for &s in g.spouses_of(v) {
                if arrive(s, true, &mut queue) {
                    return true;
                }
            }
        }
    }
    false
}

fn directed_reach(g: &Admg, a: usize, b: usize, cond: &[bool]) -> bool {
    let mut seen = vec![false; g.len()];
    let mut stack: Vec<usize> = g.children_of(a).iter().copied().collect();
    while let Some(v) = stack.pop() {
        if v == b {
            return true;
        }
        if seen[v] || cond[v] || v == a {
            continue;
        }
        seen[v] = true;
        stack.extend(g.children_of(v).iter().copied());
    }
    false
}

/// One step of a rendered path, read from the start vertex towards the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    /// `u -> v`
    Forward,
    /// `u <- v`
    Backward,
    /// `u <-> v`
    Bidirected,
}

impl Step {
    fn head_at_start(self) -> bool {
        matches!(self, Step::Backward | Step::Bidirected)
    }
    fn head_at_end(self) -> bool {
        matches!(self, Step::Forward | Step::Bidirected)
    }
    fn token(self) -> &'static str {
        match self {
            Step::Forward => "->",
            Step::Backward => "<-",
            Step::Bidirected => "<->",
        }
    }
}

/// A simple path, stored as its vertex sequence and the edges between consecutive vertices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphPath {
    pub vertices: Vec<String>,
    pub steps: Vec<Step>,
}

impl GraphPath {
    /// True when intermediate vertex `i` (1-based position in `vertices`) is a collider.
    pub fn is_collider_at(&self, i: usize) -> bool {
        self.steps[i - 1].head_at_end() && self.steps[i].head_at_start()
    }

    pub fn is_collider_free(&self) -> bool {
        (1..self.vertices.len() - 1).all(|i| !self.is_collider_at(i))
    }

    /// Whether the path is of the given shape (blocking is not considered here).
    pub fn has_shape(&self, kind: ConnectionKind) -> bool {
        let first = self.steps[0];
        let last = *self.steps.last().expect("paths have at least one edge");
        match kind {
            ConnectionKind::Directed => self.steps.iter().all(|s| *s == Step::Forward),
            ConnectionKind::ConfArc => {
                first.head_at_start() && last.head_at_end() && self.is_collider_free()
            }
            ConnectionKind::ConfPath => first.head_at_start() && last.head_at_end(),
            ConnectionKind::MConn => true,
        }
    }
}

impl fmt::Display for GraphPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.vertices[0])?;
        for (step, v) in self.steps.iter().zip(&self.vertices[1..]) {
            write!(f, " {} {}", step.token(), v)?;
        }
        Ok(())
    }
}

/// All simple paths of the given kind from `a` to `b` that are ancestrally unblocked
/// given `c`: every non-collider lies outside `c`, every collider lies in `c` or has a
/// descendant in `c`. Sorted by vertex sequence, then edge marks.
pub fn enumerate_unblocked_paths(
    g: &Admg,
    kind: ConnectionKind,
    a: &str,
    b: &str,
    c: &VertexSet,
) -> Result<Vec<GraphPath>, SeparationError> {
    if g.len() > PATH_ENUMERATION_LIMIT {
        return Err(SeparationError::TooLarge {
            limit: PATH_ENUMERATION_LIMIT,
            actual: g.len(),
        });
    }
    let (ia, ib) = check_endpoints(g, a, b, c)?;
    let cond = g.mask(c)?;
    let anc_c = g.ancestors(c)?;
    let opens_collider: Vec<bool> = (0..g.len())
        .map(|v| cond[v] || anc_c.contains(g.name(v)))
        .collect();

    let mut out = Vec::new();
    let mut on_path = vec![false; g.len()];
    let mut verts = vec![ia];
    let mut steps = Vec::new();
    on_path[ia] = true;
    extend_paths(g, ib, &mut on_path, &mut verts, &mut steps, &mut out);

    let mut result: Vec<GraphPath> = out
        .into_iter()
        .map(|(vs, st)| GraphPath {
            vertices: vs.iter().map(|&v| g.name(v).to_string()).collect(),
            steps: st,
        })
        .filter(|p| p.has_shape(kind))
        .filter(|p| {
            (1..p.vertices.len() - 1).all(|i| {
                let v = g.require(&p.vertices[i]).expect("vertex from graph");
                if p.is_collider_at(i) {
                    opens_collider[v]
                } else {
                    !cond[v]
                }
            })
        })
        .collect();
    result.sort();
    Ok(result)
}

fn extend_paths(
    g: &Admg,
    target: usize,
    on_path: &mut Vec<bool>,
    verts: &mut Vec<usize>,
    steps: &mut Vec<Step>,
    out: &mut Vec<(Vec<usize>, Vec<Step>)>,
) {
    let v = *verts.last().expect("non-empty");
    let mut moves: Vec<(usize, Step)> = Vec::new();
    moves.extend(g.children_of(v).iter().map(|&w| (w, Step::Forward)));
    moves.extend(g.parents_of(v).iter().map(|&w| (w, Step::Backward)));
    moves.extend(g.spouses_of(v).iter().map(|&w| (w, Step::Bidirected)));
    for (w, step) in moves {
        if on_path[w] {
            continue;
        }
        verts.push(w);
        steps.push(step);
        if w == target {
            out.push((verts.clone(), steps.clone()));
        } else {
            on_path[w] = true;
            extend_paths(g, target, on_path, verts, steps, out);
            on_path[w] = false;
        }
        verts.pop();
        steps.pop();
    }
}

/// True when `x` and `y` fall in different districts of the latent projection onto
/// `{x, y} ∪ s`.
pub fn district_criterion(
    g: &Admg,
    x: &str,
    y: &str,
    s: &VertexSet,
) -> Result<bool, SeparationError> {
    check_endpoints(g, x, y, s)?;
    let mut keep = s.clone();
    keep.insert(x.to_string());
    keep.insert(y.to_string());
    let m = g.marginalize(&keep)?;
    Ok(!m.districts().iter().any(|d| d.contains(x) && d.contains(y)))
}

/// True when the latent projection onto `{a, b} ∪ c` has a path from `a` to `b` whose
/// every intermediate vertex is a collider.
pub fn collider_connected(
    g: &Admg,
    a: &str,
    b: &str,
    c: &VertexSet,
) -> Result<bool, SeparationError> {
    check_endpoints(g, a, b, c)?;
    let mut keep = c.clone();
    keep.insert(a.to_string());
    keep.insert(b.to_string());
    let m = g.marginalize(&keep)?;
    let (ia, ib) = (m.require(a)?, m.require(b)?);
    // Adjacent endpoints are trivially collider-connected.
    if m.children_of(ia).contains(&ib)
        || m.parents_of(ia).contains(&ib)
        || m.spouses_of(ia).contains(&ib)
    {
        return Ok(true);
    }
    // Otherwise: a *-> v1 <-> ... <-> vk <-* b. Collect vertices entered with an arrowhead
    // from `a`, spread along bidirected edges, and look for one pointing at from `b`.
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut stack: Vec<usize> = m
        .children_of(ia)
        .iter()
        .chain(m.spouses_of(ia))
        .copied()
        .collect();
    while let Some(v) = stack.pop() {
        if v == ib || v == ia || !seen.insert(v) {
            continue;
        }
        stack.extend(m.spouses_of(v).iter().copied());
    }
    let into_from_b: BTreeSet<usize> = m
        .children_of(ib)
        .iter()
        .chain(m.spouses_of(ib))
        .copied()
        .collect();
    Ok(seen.iter().any(|v| into_from_b.contains(v)))
}

/// Set-lifted relation: some `a ∈ left`, `b ∈ right` with `a ≠ b` are connected given `c`.
/// Pairs where either endpoint lies in `c` are skipped, and an empty side is never
/// connected.
pub fn connected_sets(
    g: &Admg,
    kind: ConnectionKind,
    left: &VertexSet,
    right: &VertexSet,
    c: &VertexSet,
) -> Result<bool, SeparationError> {
    for a in left {
        for b in right {
            if a == b || c.contains(a) || c.contains(b) {
                continue;
            }
            if connected(g, kind, a, b, c)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vset;

    fn g(text: &str) -> Admg {
        Admg::parse(text).unwrap()
    }

    #[test]
    fn collider_with_conditioned_child_is_open() {
        let g1 = g("vertex A\nvertex B\nvertex C\nvertex D\nA -> D\nB -> D\nD -> C\n");
        assert!(connected(&g1, ConnectionKind::MConn, "A", "B", &vset(["C"])).unwrap());
        assert!(!connected(&g1, ConnectionKind::MConn, "A", "B", &vset::<_, &str>([])).unwrap());
    }

    #[test]
    fn paths_render_with_arrows() {
        let g1 = g("vertex B\nvertex X\nvertex Y\nB -> X\nB -> Y\nX <-> Y\n");
        let paths =
            enumerate_unblocked_paths(&g1, ConnectionKind::ConfArc, "X", "Y", &VertexSet::new())
                .unwrap();
        let rendered: Vec<String> = paths.iter().map(ToString::to_string).collect();
        assert_eq!(rendered, vec!["X <- B -> Y", "X <-> Y"]);
    }

    #[test]
    fn rejects_bad_endpoints() {
        let g1 = g("vertex A\nvertex B\n");
        assert!(matches!(
            connected(&g1, ConnectionKind::MConn, "A", "A", &VertexSet::new()),
            Err(SeparationError::SameEndpoints(_))
        ));
        assert!(matches!(
            connected(&g1, ConnectionKind::MConn, "A", "B", &vset(["A"])),
            Err(SeparationError::EndpointConditioned(_))
        ));
    }
}
