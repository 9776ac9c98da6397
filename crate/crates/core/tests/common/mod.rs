#![allow(dead_code)]

use std::path::{Path, PathBuf};

use edmc::matrix::{edm, Matrix, PointConfiguration, SquaredDistanceMatrix};
use edmc::tree::{Edge, SpanningTree};
use edmc::workbench::load_points;
use rand::Rng;

pub fn iris_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/iris.csv")
}

pub fn iris() -> PointConfiguration {
    load_points(&iris_path()).expect("iris fixture").points
}

pub fn uniform_points(n: usize, p: usize, rng: &mut impl Rng) -> PointConfiguration {
    PointConfiguration::new(Matrix::from_fn(n, p, |_, _| rng.random_range(0.0..1.0))).unwrap()
}

/// Each vertex after the first hangs off a uniformly chosen earlier vertex,
/// after a random relabeling. Weights are uniform on (0.1, 10).
pub fn random_tree(n: usize, rng: &mut impl Rng) -> SpanningTree {
    let mut labels: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        labels.swap(i, rng.random_range(0..=i));
    }
    let edges = (1..n)
        .map(|k| {
            Edge::new(
                labels[k],
                labels[rng.random_range(0..k)],
                rng.random_range(0.1..10.0),
            )
        })
        .collect();
    SpanningTree::new(n, edges).unwrap()
}

/// Vertex sequence of the tree path from `a` to `b`.
pub fn tree_path(t: &SpanningTree, a: usize, b: usize) -> Vec<usize> {
    let n = t.n();
    let mut parent = vec![usize::MAX; n];
    parent[a] = a;
    let mut queue = std::collections::VecDeque::from([a]);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in t.neighbors(u) {
            if parent[v] == usize::MAX {
                parent[v] = u;
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![b];
    while *path.last().unwrap() != a {
        path.push(parent[*path.last().unwrap()]);
    }
    path.reverse();
    path
}

/// Largest edge weight on each tree path, by walking the path.
pub fn path_maxima(t: &SpanningTree) -> Matrix {
    let n = t.n();
    Matrix::from_fn(n, n, |i, j| {
        tree_path(t, i, j)
            .windows(2)
            .map(|w| t.weight(w[0], w[1]).unwrap())
            .fold(0.0, f64::max)
    })
}

/// Tree weights on the tree, and `L_ij (1 + u)` with `u` uniform on
/// (0.001, 1] elsewhere, where `L` is the path maximum.
pub fn above_bound_completion(t: &SpanningTree, rng: &mut impl Rng) -> SquaredDistanceMatrix {
    let n = t.n();
    let maxima = path_maxima(t);
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = t
                .weight(i, j)
                .unwrap_or_else(|| maxima[(i, j)] * (1.0 + rng.random_range(0.001..=1.0)));
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    SquaredDistanceMatrix::new(d).unwrap()
}

pub fn uniform_edm(n: usize, p: usize, rng: &mut impl Rng) -> SquaredDistanceMatrix {
    edm(&uniform_points(n, p, rng))
}
