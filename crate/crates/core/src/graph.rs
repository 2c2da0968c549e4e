// SPDX-License-Identifier: MIT
//! Acyclic directed mixed graphs (ADMGs), their text format and latent projection.
//!
//! Vertices are identified by name and kept in byte-wise lexicographic order, so the
//! index of a vertex is stable for a given vertex set. Every vertex carries an
//! observed/latent flag. Edges are directed pairs `a -> b` and unordered bidirected pairs
//! `a <-> b`; a pair may carry both kinds at once.
//!
//! The text format is line oriented:
//!
//! ```text
//! # comment
//! vertex X
//! latent U
//! U -> X
//! X <-> Y
//! ```
//!
//! Vertices must be declared before they are used in an edge.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// A set of vertex names, iterated in lexicographic order.
pub type VertexSet = BTreeSet<String>;

/// Build a [`VertexSet`] from anything that yields string-like items.
pub fn vset<I, S>(items: I) -> VertexSet
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    items.into_iter().map(|s| s.as_ref().to_string()).collect()
}

/// Render a vertex set as `{A,B,C}`.
pub fn format_set(set: &VertexSet) -> String {
    let inner: Vec<&str> = set.iter().map(String::as_str).collect();
    format!("{{{}}}", inner.join(","))
}

/// Returns true when `name` matches `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Structural errors raised while building or querying a graph.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid vertex name `{0}`")]
    InvalidName(String),
    #[error("undeclared vertex `{0}`")]
    UndeclaredVertex(String),
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge {0}")]
    DuplicateEdge(String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("edge {0} would create a directed cycle")]
    DirectedCycle(String),
}

/// A [`GraphError`] annotated with the 1-based line it was raised on.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {source}")]
    Graph {
        line: usize,
        #[source]
        source: GraphError,
    },
    #[error("line {line}: cannot parse `{text}`")]
    Syntax { line: usize, text: String },
}

impl ParseError {
    /// The 1-based line number the error refers to.
    pub fn line(&self) -> usize {
        match self {
            ParseError::Graph { line, .. } | ParseError::Syntax { line, .. } => *line,
        }
    }
}

/// An acyclic directed mixed graph.
#[derive(Clone, PartialEq, Eq)]
pub struct Admg {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    observed: Vec<bool>,
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
    spouses: Vec<BTreeSet<usize>>,
}

impl Default for Admg {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Admg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Admg(\n{})", self.to_text())
    }
}

impl Admg {
    pub fn new() -> Self {
        Admg {
            names: Vec::new(),
            index: BTreeMap::new(),
            observed: Vec::new(),
            parents: Vec::new(),
            children: Vec::new(),
            spouses: Vec::new(),
        }
    }

    /// Adds a vertex. Indices of existing vertices may shift to keep names sorted.
    pub fn add_vertex(&mut self, name: &str, observed: bool) -> Result<(), GraphError> {
        if !is_identifier(name) {
            return Err(GraphError::InvalidName(name.to_string()));
        }
        if self.index.contains_key(name) {
            return Err(GraphError::DuplicateVertex(name.to_string()));
        }
        let pos = self.names.partition_point(|n| n.as_str() < name);
        let shift = |set: &mut BTreeSet<usize>| {
            *set = set
                .iter()
                .map(|&i| if i >= pos { i + 1 } else { i })
                .collect();
        };
        for adj in self
            .parents
            .iter_mut()
            .chain(self.children.iter_mut())
            .chain(self.spouses.iter_mut())
        {
            shift(adj);
        }
        self.names.insert(pos, name.to_string());
        self.observed.insert(pos, observed);
        self.parents.insert(pos, BTreeSet::new());
        self.children.insert(pos, BTreeSet::new());
        self.spouses.insert(pos, BTreeSet::new());
        self.index = self
            .names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Ok(())
    }

    /// Adds `a -> b`, rejecting self-loops, duplicates and cycles.
    pub fn add_directed(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        let (ia, ib) = (self.require(a)?, self.require(b)?);
        if ia == ib {
            return Err(GraphError::SelfLoop(a.to_string()));
        }
        if self.children[ia].contains(&ib) {
            return Err(GraphError::DuplicateEdge(format!("{a} -> {b}")));
        }
        if self.reaches_directed(ib, ia) {
            return Err(GraphError::DirectedCycle(format!("{a} -> {b}")));
        }
        self.children[ia].insert(ib);
        self.parents[ib].insert(ia);
        Ok(())
    }

    /// Adds `a <-> b`, rejecting self-loops and duplicates.
    pub fn add_bidirected(&mut self, a: &str, b: &str) -> Result<(), GraphError> {
        let (ia, ib) = (self.require(a)?, self.require(b)?);
        if ia == ib {
            return Err(GraphError::SelfLoop(a.to_string()));
        }
        if self.spouses[ia].contains(&ib) {
            let (p, q) = canonical_pair(a, b);
            return Err(GraphError::DuplicateEdge(format!("{p} <-> {q}")));
        }
        self.spouses[ia].insert(ib);
        self.spouses[ib].insert(ia);
        Ok(())
    }

    /// Parses the line-oriented text format.
    pub fn parse(text: &str) -> Result<Admg, ParseError> {
        let mut g = Admg::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = content.split_whitespace().collect();
            let wrap = |source| ParseError::Graph { line, source };
            match tokens.as_slice() {
                ["vertex", name] => g.add_vertex(name, true).map_err(wrap)?,
                ["latent", name] => g.add_vertex(name, false).map_err(wrap)?,
                [a, "->", b] => g.add_directed(a, b).map_err(wrap)?,
                [a, "<->", b] => g.add_bidirected(a, b).map_err(wrap)?,
                _ => {
                    return Err(ParseError::Syntax {
                        line,
                        text: content.to_string(),
                    })
                }
            }
        }
        Ok(g)
    }

    /// Canonical text: vertex declarations sorted by name, then directed edges, then
    /// bidirected edges, each sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, name) in self.names.iter().enumerate() {
            let kw = if self.observed[i] { "vertex" } else { "latent" };
            out.push_str(&format!("{kw} {name}\n"));
        }
        for (a, b) in self.directed_edges() {
            out.push_str(&format!("{a} -> {b}\n"));
        }
        for (a, b) in self.bidirected_edges() {
            out.push_str(&format!("{a} <-> {b}\n"));
        }
        out
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn vertices(&self) -> impl Iterator<Item = &str> + '_ {
        self.names.iter().map(String::as_str)
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.names.iter().cloned().collect()
    }

    pub fn observed_vertices(&self) -> VertexSet {
        self.names
            .iter()
            .zip(&self.observed)
            .filter(|(_, &o)| o)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn is_observed(&self, name: &str) -> Result<bool, GraphError> {
        Ok(self.observed[self.require(name)?])
    }

    pub fn has_directed(&self, a: &str, b: &str) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&ia), Some(&ib)) => self.children[ia].contains(&ib),
            _ => false,
        }
    }

    pub fn has_bidirected(&self, a: &str, b: &str) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&ia), Some(&ib)) => self.spouses[ia].contains(&ib),
            _ => false,
        }
    }

    /// Directed edges `(tail, head)` in lexicographic order.
    pub fn directed_edges(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (i, ch) in self.children.iter().enumerate() {
            for &j in ch {
                out.push((self.names[i].as_str(), self.names[j].as_str()));
            }
        }
        out
    }

    /// Bidirected edges with the smaller name first, in lexicographic order.
    pub fn bidirected_edges(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        for (i, sp) in self.spouses.iter().enumerate() {
            for &j in sp.range(i + 1..) {
                out.push((self.names[i].as_str(), self.names[j].as_str()));
            }
        }
        out
    }

    pub fn parents(&self, name: &str) -> Result<VertexSet, GraphError> {
        Ok(self.names_of(&self.parents[self.require(name)?]))
    }

    pub fn children(&self, name: &str) -> Result<VertexSet, GraphError> {
        Ok(self.names_of(&self.children[self.require(name)?]))
    }

    pub fn spouses(&self, name: &str) -> Result<VertexSet, GraphError> {
        Ok(self.names_of(&self.spouses[self.require(name)?]))
    }

    /// Proper ancestors of the set: vertices with a directed path into some member.
    /// A vertex is not its own ancestor, but a member can be an ancestor of another.
    pub fn ancestors(&self, set: &VertexSet) -> Result<VertexSet, GraphError> {
        let seeds = self.indices(set)?;
        Ok(self.names_of_mask(&self.proper_closure(&seeds, &self.parents)))
    }

    /// Proper descendants of the set, defined dually to [`Admg::ancestors`].
    pub fn descendants(&self, set: &VertexSet) -> Result<VertexSet, GraphError> {
        let seeds = self.indices(set)?;
        Ok(self.names_of_mask(&self.proper_closure(&seeds, &self.children)))
    }

    /// Connected components of the bidirected part, sorted by their smallest member.
    pub fn districts(&self) -> Vec<VertexSet> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut comp = BTreeSet::new();
            let mut queue = VecDeque::from([start]);
            seen[start] = true;
            while let Some(v) = queue.pop_front() {
                comp.insert(v);
                for &w in &self.spouses[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            out.push(self.names_of(&comp));
        }
        out
    }

    /// Latent projection onto `keep`.
    ///
    /// `a -> b` survives when some directed path from `a` to `b` has every intermediate
    /// outside `keep`; `a <-> b` survives when some collider-free path with arrowheads at
    /// both ends has every intermediate outside `keep`. Observed flags are preserved.
    pub fn marginalize(&self, keep: &VertexSet) -> Result<Admg, GraphError> {
        let kept = self.indices(keep)?;
        let mut in_keep = vec![false; self.len()];
        for &k in &kept {
            in_keep[k] = true;
        }
        let mut out = Admg::new();
        for &k in &kept {
            out.add_vertex(&self.names[k], self.observed[k])?;
        }
        for &a in &kept {
            // Directed reach through marginalised vertices only.
            let down = self.reach_through(&[a], &self.children, &in_keep);
            for &b in &kept {
                if b != a && down[b] {
                    out.children[out.index[&self.names[a]]].insert(out.index[&self.names[b]]);
                    out.parents[out.index[&self.names[b]]].insert(out.index[&self.names[a]]);
                }
            }
        }
        for &a in &kept {
            let conf = self.confounded_through(a, &in_keep);
            for &b in &kept {
                if b != a && conf[b] {
                    let (ia, ib) = (out.index[&self.names[a]], out.index[&self.names[b]]);
                    out.spouses[ia].insert(ib);
                    out.spouses[ib].insert(ia);
                }
            }
        }
        Ok(out)
    }

    /// Replace every bidirected edge `a <-> b` by a fresh latent parent of both endpoints.
    ///
    /// Returns the resulting DAG; projecting it back onto the original vertices gives
    /// the original graph. Fresh names take the form `U_a_b`, extended with underscores
    /// until they are unused.
    pub fn canonical_dag(&self) -> Admg {
        let mut out = self.clone();
        for (a, b) in self.bidirected_edges() {
            let mut name = format!("U_{a}_{b}");
            while out.contains(&name) {
                name.push('_');
            }
            out.add_vertex(&name, false).expect("fresh identifier");
            let (ia, ib) = (out.index[a], out.index[b]);
            out.spouses[ia].remove(&ib);
            out.spouses[ib].remove(&ia);
            out.add_directed(&name, a).expect("fresh source");
            out.add_directed(&name, b).expect("fresh source");
        }
        out
    }

    // ----- index-level helpers shared with the other modules -----

    pub(crate) fn require(&self, name: &str) -> Result<usize, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UndeclaredVertex(name.to_string()))
    }

    pub(crate) fn indices(&self, set: &VertexSet) -> Result<Vec<usize>, GraphError> {
        set.iter().map(|n| self.require(n)).collect()
    }

    pub(crate) fn mask(&self, set: &VertexSet) -> Result<Vec<bool>, GraphError> {
        let mut m = vec![false; self.len()];
        for i in self.indices(set)? {
            m[i] = true;
        }
        Ok(m)
    }

    pub(crate) fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub(crate) fn children_of(&self, i: usize) -> &BTreeSet<usize> {
        &self.children[i]
    }

    pub(crate) fn parents_of(&self, i: usize) -> &BTreeSet<usize> {
        &self.parents[i]
    }

    pub(crate) fn spouses_of(&self, i: usize) -> &BTreeSet<usize> {
        &self.spouses[i]
    }

    pub(crate) fn names_of(&self, set: &BTreeSet<usize>) -> VertexSet {
        set.iter().map(|&i| self.names[i].clone()).collect()
    }

    pub(crate) fn names_of_mask(&self, mask: &[bool]) -> VertexSet {
        mask.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.names[i].clone())
            .collect()
    }

    /// Vertices reachable from `seeds` by one or more steps along `adj`.
    pub(crate) fn proper_closure(&self, seeds: &[usize], adj: &[BTreeSet<usize>]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            stack.extend(adj[s].iter().copied());
        }
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend(adj[v].iter().copied());
            }
        }
        seen
    }

    fn reaches_directed(&self, from: usize, to: usize) -> bool {
        from == to || self.proper_closure(&[from], &self.children)[to]
    }

    /// Vertices reachable from `seeds` in one or more steps along `adj`, where every
    /// intermediate vertex is outside `stop`. Vertices in `stop` are reported but not
    /// expanded.
    fn reach_through(&self, seeds: &[usize], adj: &[BTreeSet<usize>], stop: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut expanded = vec![false; self.len()];
        let mut stack: Vec<usize> = Vec::new();
        for &s in seeds {
            stack.extend(adj[s].iter().copied());
        }
        while let Some(v) = stack.pop() {
            seen[v] = true;
            if stop[v] || expanded[v] {
                continue;
            }
            expanded[v] = true;
            stack.extend(adj[v].iter().copied());
        }
        seen
    }

    /// Kept vertices `b` joined to `a` by a collider-free path with arrowheads at both
    /// ends whose intermediates all lie outside `keep`.
    fn confounded_through(&self, a: usize, keep: &[bool]) -> Vec<bool> {
        // Such a path climbs from `a` against edge direction through marginalised
        // vertices, then optionally crosses one bidirected edge, then descends.
        let mut out = vec![false; self.len()];
        // Upward phase: marginalised ancestors reachable from `a` via marginalised vertices.
        let mut up = vec![false; self.len()];
        let mut stack: Vec<usize> = self.parents[a]
            .iter()
            .copied()
            .filter(|&p| !keep[p])
            .collect();
        while let Some(v) = stack.pop() {
            if up[v] {
                continue;
            }
            up[v] = true;
            stack.extend(self.parents[v].iter().copied().filter(|&p| !keep[p]));
        }
        // Tops that can start the descent: the marginalised ancestors themselves (fork
        // at the top) and endpoints reached across one bidirected edge.
        // Vertices whose outgoing edges begin the descent.
        let down_from_tail: Vec<usize> = (0..self.len()).filter(|&v| up[v]).collect();
        let mut arrive_head: Vec<usize> = Vec::new(); // vertices entered with an arrowhead
        let bidir_sources: Vec<usize> = std::iter::once(a)
            .chain((0..self.len()).filter(|&v| up[v]))
            .collect();
        for s in bidir_sources {
            for &w in &self.spouses[s] {
                arrive_head.push(w);
            }
        }
        for &t in &down_from_tail {
            for &c in &self.children[t] {
                arrive_head.push(c);
            }
        }
        // Descent phase: follow children through marginalised vertices.
        let mut visited = vec![false; self.len()];
        while let Some(v) = arrive_head.pop() {
            if v == a {
                continue;
            }
            if keep[v] {
                out[v] = true;
                continue;
            }
            if visited[v] {
                continue;
            }
            visited[v] = true;
            arrive_head.extend(self.children[v].iter().copied());
        }
        out
    }
}

/// Orders a pair so that the lexicographically smaller name comes first.
pub fn canonical_pair<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}
