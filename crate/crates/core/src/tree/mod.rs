//! Graph layer: known-entry masks, spanning trees, minimum spanning trees and
//! the bound matrices derived from them.

mod bounds;
mod mst;
mod paths;

pub use bounds::{mst_lower_bounds, split_tree, Subtree};
pub use mst::{is_mst_preserving, mst, mst_complete, MstOutcome};
pub use paths::{shortest_path_upper_bounds, shortest_paths, ShortestPaths};

#[cfg(debug_assertions)]
pub(crate) use mst::prim_over;

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, SquaredDistanceMatrix};

/// Undirected weighted edge, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    pub fn new(a: usize, b: usize, weight: f64) -> Self {
        Self {
            u: a.min(b),
            v: a.max(b),
            weight,
        }
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.u, self.v)
    }
}

/// A tree on the vertices `0..n` with `n - 1` weighted edges.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    n: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl SpanningTree {
    /// Edges are normalized and sorted by endpoint pair.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTree(
                "a tree needs at least one vertex".into(),
            ));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges given for {n} vertices",
                edges.len()
            )));
        }
        let mut edges: Vec<Edge> = edges
            .into_iter()
            .map(|e| Edge::new(e.u, e.v, e.weight))
            .collect();
        for e in &edges {
            if e.v >= n {
                return Err(Error::InvalidTree(format!("vertex {} out of range", e.v)));
            }
            if e.u == e.v {
                return Err(Error::InvalidTree(format!("self loop at {}", e.u)));
            }
            if !e.weight.is_finite() || e.weight < 0.0 {
                return Err(Error::InvalidTree(format!(
                    "edge ({}, {}) has weight {}",
                    e.u, e.v, e.weight
                )));
            }
        }
        edges.sort_by_key(|e| e.pair());
        let mut adjacency = vec![Vec::new(); n];
        for e in &edges {
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        let tree = Self {
            n,
            edges,
            adjacency,
        };
        // n - 1 edges plus connectivity rules out cycles and duplicates.
        if tree.component_of(0, None).len() != n {
            return Err(Error::InvalidTree(
                "edges do not connect every vertex".into(),
            ));
        }
        Ok(tree)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Neighbors of `v` with edge weights, by increasing index.
    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        self.adjacency
            .get(a)?
            .iter()
            .find(|&&(v, _)| v == b)
            .map(|&(_, w)| w)
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.weight(a, b).is_some()
    }

    /// Sorted `(u, v)` pairs with `u < v`.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        self.edges.iter().map(Edge::pair).collect()
    }

    pub fn same_edges(&self, other: &SpanningTree) -> bool {
        self.n == other.n && self.edge_pairs() == other.edge_pairs()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// The tree's weights as a partial dissimilarity.
    pub fn to_partial(&self) -> PartialDissimilarity {
        let mut values = Matrix::zeros(self.n, self.n);
        for e in &self.edges {
            values[(e.u, e.v)] = e.weight;
            values[(e.v, e.u)] = e.weight;
        }
        PartialDissimilarity {
            mask: AdjacencyMask::from_tree(self),
            values,
        }
    }

    /// Vertices reachable from `start` without crossing `cut`, in BFS order.
    pub(crate) fn component_of(&self, start: usize, cut: Option<(usize, usize)>) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut order = vec![start];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.adjacency[u] {
                let crosses = cut.is_some_and(|(a, b)| (a, b) == (u.min(v), u.max(v)));
                if !seen[v] && !crosses {
                    seen[v] = true;
                    order.push(v);
                    queue.push_back(v);
                }
            }
        }
        order
    }
}

/// Symmetric hollow 0/1 pattern of known entries whose graph is connected.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMask {
    n: usize,
    bits: Vec<bool>,
}

impl AdjacencyMask {
    /// `bits` is row-major `n * n`; the diagonal is ignored.
    pub fn new(n: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                got: (bits.len(), 1),
            });
        }
        let mut bits = bits;
        for i in 0..n {
            bits[i * n + i] = false;
            for j in (i + 1)..n {
                if bits[i * n + j] != bits[j * n + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let mask = Self { n, bits };
        if !mask.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(mask)
    }

    pub fn complete(n: usize) -> Self {
        let bits = (0..n * n).map(|k| k / n.max(1) != k % n.max(1)).collect();
        Self { n, bits }
    }

    pub fn from_tree(t: &SpanningTree) -> Self {
        let n = t.n();
        let mut bits = vec![false; n * n];
        for e in t.edges() {
            bits[e.u * n + e.v] = true;
            bits[e.v * n + e.u] = true;
        }
        Self { n, bits }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_set(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.n + j]
    }

    /// Number of known unordered pairs.
    pub fn pair_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count() / 2
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&j| self.is_set(i, j))
    }

    pub fn is_connected(&self) -> bool {
        connected(self.n, |i, j| self.is_set(i, j))
    }
}

pub(crate) fn connected(n: usize, adjacent: impl Fn(usize, usize) -> bool) -> bool {
    if n == 0 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for v in 0..n {
            if !seen[v] && adjacent(u, v) {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// Known dissimilarities on a connected mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialDissimilarity {
    mask: AdjacencyMask,
    values: Matrix,
}

impl PartialDissimilarity {
    pub fn new(mask: AdjacencyMask, values: &Matrix) -> Result<Self> {
        let n = mask.n();
        if values.rows() != n || values.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                got: (values.rows(), values.cols()),
            });
        }
        let mut known = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                known[i * n + j] = i == j || mask.is_set(i, j);
            }
        }
        let checked = SquaredDistanceMatrix::with_missing(values.clone(), known)?;
        Ok(Self {
            mask,
            values: checked.into_values(),
        })
    }

    /// Uses the known entries of `d`; fails when they do not connect.
    pub fn from_matrix(d: &SquaredDistanceMatrix) -> Result<Self> {
        let n = d.order();
        let bits = (0..n * n).map(|k| d.is_known(k / n, k % n)).collect();
        Ok(Self {
            mask: AdjacencyMask::new(n, bits)?,
            values: d.values().clone(),
        })
    }

    /// Keeps only the entries of `d` on `mask`.
    pub fn restrict(d: &SquaredDistanceMatrix, mask: AdjacencyMask) -> Result<Self> {
        let n = mask.n();
        if d.order() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                got: (d.order(), d.order()),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if mask.is_set(i, j) && !d.is_known(i, j) {
                    return Err(Error::MissingEntries);
                }
            }
        }
        let values = Matrix::from_fn(n, n, |i, j| {
            if mask.is_set(i, j) {
                d.values()[(i, j)]
            } else {
                0.0
            }
        });
        Ok(Self { mask, values })
    }

    pub fn n(&self) -> usize {
        self.mask.n()
    }

    pub fn mask(&self) -> &AdjacencyMask {
        &self.mask
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.mask.is_set(i, j).then(|| self.values[(i, j)])
    }

    /// Values with zeros at unknown entries.
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn to_matrix(&self) -> SquaredDistanceMatrix {
        let n = self.n();
        let known = (0..n * n)
            .map(|k| k / n == k % n || self.mask.is_set(k / n, k % n))
            .collect();
        SquaredDistanceMatrix::with_missing(self.values.clone(), known)
            .expect("validated on construction")
    }
}

/// An upper bound that is either finite or absent. No arithmetic is defined
/// on the unbounded case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperBound {
    Finite(f64),
    Unbounded,
}

impl UpperBound {
    pub fn finite(self) -> Option<f64> {
        match self {
            UpperBound::Finite(v) => Some(v),
            UpperBound::Unbounded => None,
        }
    }

    /// Clamps `x` from above.
    pub fn clamp(self, x: f64) -> f64 {
        match self {
            UpperBound::Finite(u) => x.min(u),
            UpperBound::Unbounded => x,
        }
    }

    pub fn admits(self, x: f64) -> bool {
        match self {
            UpperBound::Finite(u) => x <= u,
            UpperBound::Unbounded => true,
        }
    }
}

/// Elementwise box `lower <= delta <= upper` on the off-diagonal entries.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsPair {
    lower: Matrix,
    upper: Vec<UpperBound>,
}

impl BoundsPair {
    /// `upper` is row-major `n * n`. Diagonals are forced to zero.
    pub fn new(lower: Matrix, upper: Vec<UpperBound>) -> Result<Self> {
        let n = lower.ensure_square()?;
        if upper.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                got: (upper.len(), 1),
            });
        }
        let mut lower = lower;
        let mut upper = upper;
        for i in 0..n {
            lower[(i, i)] = 0.0;
            upper[i * n + i] = UpperBound::Finite(0.0);
            for j in 0..n {
                let (lo, up) = (lower[(i, j)], upper[i * n + j]);
                if !lo.is_finite() || up.finite().is_some_and(|u| !u.is_finite()) {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if lo < 0.0 {
                    return Err(Error::Negative { row: i, col: j });
                }
                if lower[(j, i)] != lo || upper[j * n + i] != up {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
                if !up.admits(lo) {
                    return Err(Error::InconsistentBounds {
                        row: i,
                        col: j,
                        lower: lo,
                        upper: up.finite().unwrap_or(f64::INFINITY),
                    });
                }
            }
        }
        Ok(Self { lower, upper })
    }

    pub fn from_matrices(lower: &Matrix, upper: &Matrix) -> Result<Self> {
        Self::new(
            lower.clone(),
            upper
                .as_slice()
                .iter()
                .map(|&u| UpperBound::Finite(u))
                .collect(),
        )
    }

    /// Known entries of `p` pinned, free entries in `[0, ∞)`.
    pub fn pinned(p: &PartialDissimilarity) -> Self {
        let n = p.n();
        let upper = (0..n * n)
            .map(|k| {
                let (i, j) = (k / n, k % n);
                match p.get(i, j) {
                    Some(v) => UpperBound::Finite(v),
                    None if i == j => UpperBound::Finite(0.0),
                    None => UpperBound::Unbounded,
                }
            })
            .collect();
        Self {
            lower: p.values().clone(),
            upper,
        }
    }

    pub fn n(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[(i, j)]
    }

    pub fn upper(&self, i: usize, j: usize) -> UpperBound {
        self.upper[i * self.n() + j]
    }

    pub fn lower_matrix(&self) -> &Matrix {
        &self.lower
    }

    /// `lower == upper` at `(i, j)`.
    pub fn is_pinned(&self, i: usize, j: usize) -> bool {
        self.upper(i, j).finite() == Some(self.lower(i, j))
    }

    pub fn contains(&self, i: usize, j: usize, x: f64) -> bool {
        x >= self.lower(i, j) && self.upper(i, j).admits(x)
    }

    pub fn clamp(&self, i: usize, j: usize, x: f64) -> f64 {
        self.upper(i, j).clamp(x.max(self.lower(i, j)))
    }

    /// Checks that every known entry of `p` is pinned to its value.
    pub fn ensure_pins(&self, p: &PartialDissimilarity) -> Result<()> {
        let n = p.n();
        if self.n() != n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                got: (self.n(), self.n()),
            });
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if let Some(v) = p.get(i, j) {
                    if self.lower(i, j) != v || self.upper(i, j).finite() != Some(v) {
                        return Err(Error::InvalidConfig(format!(
                            "bounds do not pin known entry ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
