// SPDX-License-Identifier: MIT
//! Test-side reference implementations, written independently of the library's
//! reachability code: plain simple-path enumeration over an edge list.

#![allow(dead_code)]

use std::path::PathBuf;

use confsel::random::{corpus, RandomAdmgConfig};
use confsel::{Admg, ConnectionKind, VertexSet};

pub fn graph(name: &str) -> Admg {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../graphs")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    Admg::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub const GOLDEN: &[&str] = &[
    "butterfly.g",
    "shrier.g",
    "worked_trace.g",
    "latent_projection_g.g",
    "latent_projection_g1.g",
    "latent_projection_g2.g",
    "latent_projection_f.g",
    "latent_projection_f1.g",
    "collider_chain.g",
    "collider_isolated.g",
];

pub fn random_graphs(
    seed: u64,
    count: usize,
    max_vertices: usize,
    max_latents: usize,
) -> Vec<Admg> {
    corpus(
        seed,
        count,
        &RandomAdmgConfig {
            max_vertices,
            max_latents,
            ..Default::default()
        },
    )
}

/// Every subset of `items`.
pub fn subsets(items: &[String]) -> Vec<VertexSet> {
    (0..1usize << items.len())
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

pub fn names(g: &Admg) -> Vec<String> {
    g.vertices().map(str::to_string).collect()
}

/// One edge end seen from a vertex: the neighbour, whether the edge has an arrowhead
/// here, whether it has one at the neighbour, and whether it is a directed edge pointing
/// away from here.
#[derive(Clone, Copy)]
struct End {
    to: usize,
    head_here: bool,
    head_there: bool,
    forward: bool,
}

/// A mixed graph as adjacency lists of edge ends.
pub struct Naive {
    names: Vec<String>,
    adj: Vec<Vec<End>>,
    parents: Vec<Vec<usize>>,
}

impl Naive {
    pub fn new(g: &Admg) -> Self {
        let names = names(g);
        let at = |v: &str| names.iter().position(|n| n == v).unwrap();
        let mut adj = vec![Vec::new(); names.len()];
        let mut parents = vec![Vec::new(); names.len()];
        for (a, b) in g.directed_edges() {
            let (i, j) = (at(a), at(b));
            adj[i].push(End {
                to: j,
                head_here: false,
                head_there: true,
                forward: true,
            });
            adj[j].push(End {
                to: i,
                head_here: true,
                head_there: false,
                forward: false,
            });
            parents[j].push(i);
        }
        for (a, b) in g.bidirected_edges() {
            let (i, j) = (at(a), at(b));
            adj[i].push(End {
                to: j,
                head_here: true,
                head_there: true,
                forward: false,
            });
            adj[j].push(End {
                to: i,
                head_here: true,
                head_there: true,
                forward: false,
            });
        }
        Naive {
            names,
            adj,
            parents,
        }
    }

    fn index(&self, v: &str) -> usize {
        self.names.iter().position(|n| n == v).unwrap()
    }

    fn mask(&self, c: &VertexSet) -> Vec<bool> {
        self.names.iter().map(|n| c.contains(n)).collect()
    }

    /// Members of `c` and all their ancestors.
    fn ancestral_closure(&self, c: &[bool]) -> Vec<bool> {
        let mut out = c.to_vec();
        let mut stack: Vec<usize> = (0..c.len()).filter(|&i| c[i]).collect();
        while let Some(v) = stack.pop() {
            for &p in &self.parents[v] {
                if !out[p] {
                    out[p] = true;
                    stack.push(p);
                }
            }
        }
        out
    }

    /// Strict descendants of the given vertices.
    pub fn descendants(&self, of: &[&str]) -> VertexSet {
        let mut seen = vec![false; self.names.len()];
        let mut stack: Vec<usize> = of.iter().map(|v| self.index(v)).collect();
        while let Some(v) = stack.pop() {
            for e in &self.adj[v] {
                if e.forward && !seen[e.to] {
                    seen[e.to] = true;
                    stack.push(e.to);
                }
            }
        }
        (0..seen.len())
            .filter(|&i| seen[i])
            .map(|i| self.names[i].clone())
            .collect()
    }

    /// Whether an ancestrally unblocked simple path of `kind` joins `a` and `b` given `c`.
    pub fn connected(&self, kind: ConnectionKind, a: &str, b: &str, c: &VertexSet) -> bool {
        let (ia, ib) = (self.index(a), self.index(b));
        let cond = self.mask(c);
        let anc = self.ancestral_closure(&cond);
        let mut on_path = vec![false; self.names.len()];
        on_path[ia] = true;
        self.extend(kind, ia, ib, None, &cond, &anc, &mut on_path)
    }

    /// `arrived` is how the walk entered `v`: whether the previous edge has a head at `v`.
    #[allow(clippy::too_many_arguments)]
    fn extend(
        &self,
        kind: ConnectionKind,
        v: usize,
        target: usize,
        arrived: Option<bool>,
        cond: &[bool],
        anc: &[bool],
        on_path: &mut [bool],
    ) -> bool {
        for e in &self.adj[v] {
            match arrived {
                None => {
                    // First edge: confounding kinds need an arrowhead at the start.
                    let needs_head =
                        matches!(kind, ConnectionKind::ConfArc | ConnectionKind::ConfPath);
                    if needs_head && !e.head_here {
                        continue;
                    }
                    if kind == ConnectionKind::Directed && !e.forward {
                        continue;
                    }
                }
                Some(head_in) => {
                    let collider = head_in && e.head_here;
                    let passes = match kind {
                        ConnectionKind::Directed => e.forward && !cond[v],
                        ConnectionKind::ConfArc => !collider && !cond[v],
                        ConnectionKind::ConfPath | ConnectionKind::MConn => {
                            if collider {
                                anc[v]
                            } else {
                                !cond[v]
                            }
                        }
                    };
                    if !passes {
                        continue;
                    }
                }
            }
            if e.to == target {
                let needs_head = matches!(kind, ConnectionKind::ConfArc | ConnectionKind::ConfPath);
                if !needs_head || e.head_there {
                    return true;
                }
                continue;
            }
            if on_path[e.to] {
                continue;
            }
            on_path[e.to] = true;
            let found = self.extend(kind, e.to, target, Some(e.head_there), cond, anc, on_path);
            on_path[e.to] = false;
            if found {
                return true;
            }
        }
        false
    }

    /// No descendant of `x` or `y` in `s`, and no confounding path given `s`.
    pub fn sufficient(&self, x: &str, y: &str, s: &VertexSet) -> bool {
        s.is_disjoint(&self.descendants(&[x, y]))
            && !self.connected(ConnectionKind::ConfPath, x, y, s)
    }
}
