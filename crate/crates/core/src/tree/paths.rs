use super::PartialDissimilarity;
use crate::error::{Error, Result};
use crate::matrix::{Matrix, SquaredDistanceMatrix};

/// All-pairs shortest paths over the known entries, with edge lengths taken
/// as square roots of the dissimilarities.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPaths {
    n: usize,
    lengths: Matrix,
    segments: Vec<usize>,
    max_edge: Matrix,
}

impl ShortestPaths {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Path length in root space.
    pub fn length(&self, i: usize, j: usize) -> f64 {
        self.lengths[(i, j)]
    }

    /// Squared path length, comparable with the dissimilarities.
    pub fn squared(&self, i: usize, j: usize) -> f64 {
        let l = self.lengths[(i, j)];
        l * l
    }

    /// Number of edges on the chosen path.
    pub fn segments(&self, i: usize, j: usize) -> usize {
        self.segments[i * self.n + j]
    }

    /// Largest dissimilarity among the edges of the chosen path.
    pub fn max_edge(&self, i: usize, j: usize) -> f64 {
        self.max_edge[(i, j)]
    }
}

/// Dense Dijkstra from every source. Among equally short paths the one with
/// fewer segments wins, then the one reached through the smaller predecessor.
pub fn shortest_paths(p: &PartialDissimilarity) -> Result<ShortestPaths> {
    let n = p.n();
    let roots = Matrix::from_fn(n, n, |i, j| p.values()[(i, j)].sqrt());
    let mut lengths = Matrix::zeros(n, n);
    let mut segments = vec![0; n * n];
    let mut max_edge = Matrix::zeros(n, n);

    let mut dist = vec![0.0; n];
    let mut hops = vec![0usize; n];
    let mut heaviest = vec![0.0; n];
    let mut pred = vec![usize::MAX; n];
    let mut done = vec![false; n];
    for s in 0..n {
        dist.fill(f64::INFINITY);
        hops.fill(usize::MAX);
        heaviest.fill(0.0);
        pred.fill(usize::MAX);
        done.fill(false);
        dist[s] = 0.0;
        hops[s] = 0;
        for _ in 0..n {
            let mut u = usize::MAX;
            for v in 0..n {
                if done[v] || !dist[v].is_finite() {
                    continue;
                }
                if u == usize::MAX || (dist[v], hops[v]) < (dist[u], hops[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                return Err(Error::Disconnected);
            }
            done[u] = true;
            for v in p.mask().neighbors(u) {
                if done[v] {
                    continue;
                }
                let cand = (dist[u] + roots[(u, v)], hops[u] + 1);
                let better = match cand.0.total_cmp(&dist[v]) {
                    std::cmp::Ordering::Less => true,
                    std::cmp::Ordering::Greater => false,
                    std::cmp::Ordering::Equal => (cand.1, u) < (hops[v], pred[v]),
                };
                if better {
                    dist[v] = cand.0;
                    hops[v] = cand.1;
                    pred[v] = u;
                    heaviest[v] = f64::max(heaviest[u], p.values()[(u, v)]);
                }
            }
        }
        // Keep the matrices symmetric by recording each pair from its
        // smaller endpoint only.
        for t in s..n {
            for (a, b) in [(s, t), (t, s)] {
                lengths[(a, b)] = dist[t];
                segments[a * n + b] = hops[t];
                max_edge[(a, b)] = heaviest[t];
            }
        }
    }
    Ok(ShortestPaths {
        n,
        lengths,
        segments,
        max_edge,
    })
}

/// Upper bounds from the triangle inequality: known entries are kept, every
/// other entry is the squared root-space shortest path length. The bound is
/// never allowed below the heaviest edge of the path, which rounding in the
/// square could otherwise cause.
pub fn shortest_path_upper_bounds(p: &PartialDissimilarity) -> Result<SquaredDistanceMatrix> {
    let paths = shortest_paths(p)?;
    let n = p.n();
    let upper = Matrix::from_fn(n, n, |i, j| match p.get(i, j) {
        Some(v) => v,
        None if i == j => 0.0,
        None => paths.squared(i, j).max(paths.max_edge(i, j)),
    });
    SquaredDistanceMatrix::new(upper)
}
