use std::collections::VecDeque;

use super::{Edge, SpanningTree};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, SquaredDistanceMatrix};

/// A connected piece of a spanning tree: its vertices (sorted) and the tree
/// edges between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Subtree {
    pub vertices: Vec<usize>,
    pub edges: Vec<Edge>,
}

impl Subtree {
    pub fn whole(t: &SpanningTree) -> Self {
        Self {
            vertices: (0..t.n()).collect(),
            edges: t.edges().to_vec(),
        }
    }

    /// Removes edge `(a, b)` and returns the side holding the smaller
    /// endpoint first.
    pub fn split(&self, a: usize, b: usize) -> Result<(Subtree, Subtree)> {
        let (u, v) = (a.min(b), a.max(b));
        let cut = self
            .edges
            .iter()
            .position(|e| e.pair() == (u, v))
            .ok_or(Error::EdgeNotInTree(u, v))?;
        let size = self.vertices.iter().max().map_or(0, |m| m + 1);
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); size];
        for (k, e) in self.edges.iter().enumerate() {
            if k != cut {
                adjacency[e.u].push(e.v);
                adjacency[e.v].push(e.u);
            }
        }
        let mut on_u_side = vec![false; size];
        on_u_side[u] = true;
        let mut queue = VecDeque::from([u]);
        while let Some(x) = queue.pop_front() {
            for &y in &adjacency[x] {
                if !on_u_side[y] {
                    on_u_side[y] = true;
                    queue.push_back(y);
                }
            }
        }
        let part = |side: bool| Subtree {
            vertices: self
                .vertices
                .iter()
                .copied()
                .filter(|&x| on_u_side[x] == side)
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .filter(|&(k, e)| k != cut && on_u_side[e.u] == side)
                .map(|(_, e)| *e)
                .collect(),
        };
        Ok((part(true), part(false)))
    }

    /// Heaviest edge, the lexicographically first pair among equal weights.
    fn heaviest_edge(&self) -> Option<Edge> {
        self.edges.iter().copied().reduce(|best, e| {
            match e
                .weight
                .total_cmp(&best.weight)
                .then(best.pair().cmp(&e.pair()))
            {
                std::cmp::Ordering::Greater => e,
                _ => best,
            }
        })
    }
}

/// Splits `t` at edge `(a, b)` into two vertex-disjoint subtrees.
pub fn split_tree(t: &SpanningTree, a: usize, b: usize) -> Result<(Subtree, Subtree)> {
    Subtree::whole(t).split(a, b)
}

/// For every pair of vertices, the largest edge weight on the tree path
/// between them. Any completion that keeps `t` as its minimum spanning tree
/// must be at least this large off the tree.
///
/// Works top-down: the heaviest edge of a subtree bounds every pair it
/// separates, then each side is handled the same way.
pub fn mst_lower_bounds(t: &SpanningTree) -> SquaredDistanceMatrix {
    let n = t.n();
    let mut lower = Matrix::zeros(n, n);
    let mut pending = vec![Subtree::whole(t)];
    while let Some(piece) = pending.pop() {
        let Some(e) = piece.heaviest_edge() else {
            continue;
        };
        let (left, right) = piece.split(e.u, e.v).expect("edge taken from this subtree");
        for &a in &left.vertices {
            for &b in &right.vertices {
                lower[(a, b)] = e.weight;
                lower[(b, a)] = e.weight;
            }
        }
        pending.push(left);
        pending.push(right);
    }
    SquaredDistanceMatrix::new(lower).expect("tree weights are finite and nonnegative")
}
