// SPDX-License-Identifier: MIT
//! Adjustment-set predicates and brute-force enumerators.
//!
//! The enumerators walk subsets of a candidate pool in order of increasing size and skip
//! supersets of sets already found, so every reported set is inclusion-minimal. They are
//! exponential by design and refuse pools above a configurable cap.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{format_set, Admg, GraphError, VertexSet};
use crate::separation::{
    self, connected, district_criterion, ConnectionKind, SeparationError, WalkRule,
};

/// Default maximum size of a candidate pool for the brute-force enumerators.
pub const DEFAULT_POOL_CAP: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdjustmentError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Separation(#[from] SeparationError),
    #[error("`{0}` must not be in the adjustment set")]
    EndpointInSet(String),
    #[error("candidate pool has {actual} vertices, above the cap of {cap}")]
    PoolTooLarge { cap: usize, actual: usize },
}

/// A canonical family of vertex sets: no duplicates, ordered by size then lexicographically.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<VertexSet>", into = "Vec<VertexSet>")]
pub struct VertexSetFamily {
    sets: Vec<VertexSet>,
}

impl From<Vec<VertexSet>> for VertexSetFamily {
    fn from(sets: Vec<VertexSet>) -> Self {
        VertexSetFamily::from_sets(sets)
    }
}

impl From<VertexSetFamily> for Vec<VertexSet> {
    fn from(f: VertexSetFamily) -> Self {
        f.sets
    }
}

impl FromIterator<VertexSet> for VertexSetFamily {
    fn from_iter<I: IntoIterator<Item = VertexSet>>(iter: I) -> Self {
        VertexSetFamily::from_sets(iter)
    }
}

fn family_order(a: &VertexSet, b: &VertexSet) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl VertexSetFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_sets<I: IntoIterator<Item = VertexSet>>(sets: I) -> Self {
        let mut sets: Vec<VertexSet> = sets.into_iter().collect();
        sets.sort_by(family_order);
        sets.dedup();
        VertexSetFamily { sets }
    }

    pub fn insert(&mut self, set: VertexSet) -> bool {
        match self
            .sets
            .binary_search_by(|probe| family_order(probe, &set))
        {
            Ok(_) => false,
            Err(pos) => {
                self.sets.insert(pos, set);
                true
            }
        }
    }

    pub fn contains(&self, set: &VertexSet) -> bool {
        self.sets
            .binary_search_by(|probe| family_order(probe, set))
            .is_ok()
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, VertexSet> {
        self.sets.iter()
    }

    pub fn as_slice(&self) -> &[VertexSet] {
        &self.sets
    }

    /// Members with no proper subset in the family.
    pub fn minimal_members(&self) -> VertexSetFamily {
        let mut out: Vec<VertexSet> = Vec::new();
        // Size-ascending order means any subset of a set precedes it.
        for s in &self.sets {
            if !out.iter().any(|m| m.is_subset(s)) {
                out.push(s.clone());
            }
        }
        VertexSetFamily { sets: out }
    }

    /// True when some member is a subset of `set`.
    pub fn has_subset_of(&self, set: &VertexSet) -> bool {
        self.sets.iter().any(|m| m.is_subset(set))
    }
}

impl<'a> IntoIterator for &'a VertexSetFamily {
    type Item = &'a VertexSet;
    type IntoIter = std::slice::Iter<'a, VertexSet>;
    fn into_iter(self) -> Self::IntoIter {
        self.sets.iter()
    }
}

impl fmt::Display for VertexSetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.sets.iter().map(format_set).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

fn reject_endpoints(x: &str, y: &str, s: &VertexSet) -> Result<(), AdjustmentError> {
    for e in [x, y] {
        if s.contains(e) {
            return Err(AdjustmentError::EndpointInSet(e.to_string()));
        }
    }
    Ok(())
}

fn endpoints_descendants(g: &Admg, x: &str, y: &str) -> Result<VertexSet, AdjustmentError> {
    let mut both = VertexSet::new();
    both.insert(x.to_string());
    both.insert(y.to_string());
    Ok(g.descendants(&both)?)
}

/// `s` contains no descendant of `x` or `y`.
pub fn is_adjustment_set(
    g: &Admg,
    x: &str,
    y: &str,
    s: &VertexSet,
) -> Result<bool, AdjustmentError> {
    reject_endpoints(x, y, s)?;
    g.indices(s)?;
    let de = endpoints_descendants(g, x, y)?;
    Ok(s.is_disjoint(&de))
}

/// `s` is an adjustment set and blocks every confounding path between `x` and `y`.
///
/// Decided by the district criterion on the latent projection; in debug builds the
/// answer is cross-checked against the direct confounding-path relation.
pub fn is_sufficient(g: &Admg, x: &str, y: &str, s: &VertexSet) -> Result<bool, AdjustmentError> {
    if !is_adjustment_set(g, x, y, s)? {
        return Ok(false);
    }
    let by_district = district_criterion(g, x, y, s)?;
    debug_assert_eq!(
        by_district,
        !connected(g, ConnectionKind::ConfPath, x, y, s)?
    );
    Ok(by_district)
}

/// The classical back-door check: `s` has no descendant of `x`, and no path with an
/// arrowhead into `x` connects `x` to `y` given `s`.
pub fn pearl_backdoor(g: &Admg, x: &str, y: &str, s: &VertexSet) -> Result<bool, AdjustmentError> {
    reject_endpoints(x, y, s)?;
    let ix = g.require(x)?;
    let iy = g.require(y)?;
    let de_x = g.descendants(&std::iter::once(x.to_string()).collect())?;
    if !s.is_disjoint(&de_x) {
        return Ok(false);
    }
    let cond = g.mask(s)?;
    let rule = WalkRule {
        head_at_start: true,
        head_at_end: false,
        colliders: true,
    };
    Ok(!separation::walk_reach(g, rule, ix, iy, &cond))
}

/// `c` is an adjustment set for `(a, b)` and no confounding arc joins them given `base ∪ c`.
pub fn is_primary(
    g: &Admg,
    a: &str,
    b: &str,
    base: &VertexSet,
    c: &VertexSet,
) -> Result<bool, AdjustmentError> {
    reject_endpoints(a, b, base)?;
    if !is_adjustment_set(g, a, b, c)? {
        return Ok(false);
    }
    let cond: VertexSet = base.union(c).cloned().collect();
    Ok(!connected(g, ConnectionKind::ConfArc, a, b, &cond)?)
}

/// Common causes of `a` and `b` not blocked by `t`: vertices outside `t ∪ {a, b}` with a
/// directed path to `a` avoiding `t ∪ {b}` and a directed path to `b` avoiding `t ∪ {a}`.
pub fn common_causes(
    g: &Admg,
    a: &str,
    b: &str,
    t: &VertexSet,
) -> Result<VertexSet, AdjustmentError> {
    reject_endpoints(a, b, t)?;
    let ia = g.require(a)?;
    let ib = g.require(b)?;
    let mut to_a = g.mask(t)?;
    let mut to_b = to_a.clone();
    to_a[ib] = true;
    to_b[ia] = true;
    let mut out = VertexSet::new();
    for v in g.vertices() {
        if v == a || v == b || t.contains(v) {
            continue;
        }
        let iv = g.require(v)?;
        if separation::reach(g, ConnectionKind::Directed, iv, ia, &to_a)
            && separation::reach(g, ConnectionKind::Directed, iv, ib, &to_b)
        {
            out.insert(v.to_string());
        }
    }
    Ok(out)
}

/// Enumerates inclusion-minimal subsets of `pool` satisfying `pred`, smallest first.
pub fn minimal_subsets<F>(
    pool: &VertexSet,
    cap: usize,
    mut pred: F,
) -> Result<VertexSetFamily, AdjustmentError>
where
    F: FnMut(&VertexSet) -> Result<bool, AdjustmentError>,
{
    if pool.len() > cap {
        return Err(AdjustmentError::PoolTooLarge {
            cap,
            actual: pool.len(),
        });
    }
    let items: Vec<&String> = pool.iter().collect();
    let mut found: Vec<VertexSet> = Vec::new();
    for k in 0..=items.len() {
        for combo in combinations(items.len(), k) {
            let set: VertexSet = combo.iter().map(|&i| items[i].clone()).collect();
            if found.iter().any(|f| f.is_subset(&set)) {
                continue;
            }
            if pred(&set)? {
                found.push(set);
            }
        }
    }
    Ok(VertexSetFamily::from_sets(found))
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // Advance the rightmost position that still has room.
        let Some(i) = (0..k).rev().find(|&i| cur[i] < n - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// The pool adjustment sets for `(x, y)` are drawn from: observed vertices (or all, if
/// `observed_only` is false) other than `x`, `y` and their descendants.
pub fn adjustment_pool(
    g: &Admg,
    x: &str,
    y: &str,
    observed_only: bool,
) -> Result<VertexSet, AdjustmentError> {
    g.require(x)?;
    g.require(y)?;
    let de = endpoints_descendants(g, x, y)?;
    let base = if observed_only {
        g.observed_vertices()
    } else {
        g.vertex_set()
    };
    Ok(base
        .into_iter()
        .filter(|v| v != x && v != y && !de.contains(v))
        .collect())
}

/// All inclusion-minimal sufficient adjustment sets.
pub fn enumerate_minimal_sufficient(
    g: &Admg,
    x: &str,
    y: &str,
    observed_only: bool,
) -> Result<VertexSetFamily, AdjustmentError> {
    let pool = adjustment_pool(g, x, y, observed_only)?;
    minimal_subsets(&pool, DEFAULT_POOL_CAP, |s| is_sufficient(g, x, y, s))
}

/// Every sufficient adjustment set drawn from the pool, minimal or not.
pub fn enumerate_all_sufficient(
    g: &Admg,
    x: &str,
    y: &str,
    observed_only: bool,
) -> Result<VertexSetFamily, AdjustmentError> {
    let pool = adjustment_pool(g, x, y, observed_only)?;
    if pool.len() > DEFAULT_POOL_CAP {
        return Err(AdjustmentError::PoolTooLarge {
            cap: DEFAULT_POOL_CAP,
            actual: pool.len(),
        });
    }
    let items: Vec<&String> = pool.iter().collect();
    let mut out = Vec::new();
    for k in 0..=items.len() {
        for combo in combinations(items.len(), k) {
            let set: VertexSet = combo.iter().map(|&i| items[i].clone()).collect();
            if is_sufficient(g, x, y, &set)? {
                out.push(set);
            }
        }
    }
    Ok(VertexSetFamily::from_sets(out))
}

/// All inclusion-minimal primary sets for `(a, b)` relative to `base`, searched among
/// observed ancestors of `a` or `b`.
pub fn enumerate_minimal_primary(
    g: &Admg,
    a: &str,
    b: &str,
    base: &VertexSet,
) -> Result<VertexSetFamily, AdjustmentError> {
    let mut ends = VertexSet::new();
    ends.insert(a.to_string());
    ends.insert(b.to_string());
    let anc = g.ancestors(&ends)?;
    let pool: VertexSet = adjustment_pool(g, a, b, true)?
        .into_iter()
        .filter(|v| anc.contains(v) && !base.contains(v))
        .collect();
    enumerate_minimal_primary_over(g, a, b, base, &pool)
}

/// As [`enumerate_minimal_primary`], over an explicit candidate pool.
pub fn enumerate_minimal_primary_over(
    g: &Admg,
    a: &str,
    b: &str,
    base: &VertexSet,
    pool: &VertexSet,
) -> Result<VertexSetFamily, AdjustmentError> {
    minimal_subsets(pool, DEFAULT_POOL_CAP, |c| is_primary(g, a, b, base, c))
}

/// Inclusion-minimal observed sets `m` that cut every directed path from `cause` to `a`
/// (avoiding `b`) or every directed path from `cause` to `b` (avoiding `a`), given `base`.
///
/// Candidates are observed adjustment sets for `(a, b)` outside `base ∪ {a, b, cause}`.
pub fn enumerate_minimal_mediator_sets(
    g: &Admg,
    a: &str,
    b: &str,
    cause: &str,
    base: &VertexSet,
) -> Result<VertexSetFamily, AdjustmentError> {
    let pool: VertexSet = adjustment_pool(g, a, b, true)?
        .into_iter()
        .filter(|v| v != cause && !base.contains(v))
        .collect();
    mediator_sets_over(g, a, b, cause, base, &pool)
}

/// As [`enumerate_minimal_mediator_sets`], over an explicit candidate pool.
pub fn mediator_sets_over(
    g: &Admg,
    a: &str,
    b: &str,
    cause: &str,
    base: &VertexSet,
    pool: &VertexSet,
) -> Result<VertexSetFamily, AdjustmentError> {
    reject_endpoints(a, b, base)?;
    let (ia, ib, ic) = (g.require(a)?, g.require(b)?, g.require(cause)?);
    let base_mask = g.mask(base)?;
    minimal_subsets(pool, DEFAULT_POOL_CAP, |m| {
        let mut cond = base_mask.clone();
        for i in g.indices(m)? {
            cond[i] = true;
        }
        let mut to_a = cond.clone();
        to_a[ib] = true;
        let mut to_b = cond;
        to_b[ia] = true;
        Ok(
            !separation::reach(g, ConnectionKind::Directed, ic, ia, &to_a)
                || !separation::reach(g, ConnectionKind::Directed, ic, ib, &to_b),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::vset;

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(2, 3), Vec::<Vec<usize>>::new());
        assert_eq!(combinations(4, 4).len(), 1);
        assert_eq!(combinations(6, 3).len(), 20);
    }

    #[test]
    fn family_is_canonical() {
        let f = VertexSetFamily::from_sets([
            vset(["B", "D"]),
            vset(["C"]),
            vset(["B", "C"]),
            vset(["C"]),
        ]);
        assert_eq!(f.to_string(), "{{C},{B,C},{B,D}}");
        assert_eq!(f.minimal_members().to_string(), "{{C},{B,D}}");
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"[["C"],["B","C"],["B","D"]]"#);
    }

    #[test]
    fn pool_cap_is_explicit() {
        let pool: VertexSet = (0..16).map(|i| format!("V{i:02}")).collect();
        let err = minimal_subsets(&pool, DEFAULT_POOL_CAP, |_| Ok(true)).unwrap_err();
        assert_eq!(
            err,
            AdjustmentError::PoolTooLarge {
                cap: 15,
                actual: 16
            }
        );
    }
}
