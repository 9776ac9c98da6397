use std::cmp::Ordering;

use super::{AdjacencyMask, Edge, SpanningTree};
use crate::error::{Error, Result};
use crate::matrix::SquaredDistanceMatrix;

/// Relative tolerance for tree weights to count as matching a matrix.
pub(crate) const WEIGHT_MATCH_TOL: f64 = 1e-9;

const TIE_TOL: f64 = 1e-12;

/// A minimum spanning tree plus whether near-equal competing weights were
/// seen while building it, in which case other minimum trees may exist.
#[derive(Debug, Clone, PartialEq)]
pub struct MstOutcome {
    pub tree: SpanningTree,
    pub ties: bool,
}

/// Edge order used by Prim: weight first, then the sorted endpoint pair.
/// This is a strict total order, so the minimum tree is unique under it.
fn edge_cmp(w1: f64, a1: usize, b1: usize, w2: f64, a2: usize, b2: usize) -> Ordering {
    w1.total_cmp(&w2)
        .then_with(|| a1.min(b1).cmp(&a2.min(b2)))
        .then_with(|| a1.max(b1).cmp(&a2.max(b2)))
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIE_TOL * a.abs().max(b.abs())
}

/// Dense Prim over vertices `0..n`; `weight(i, j)` is `None` for absent edges.
pub(crate) fn prim(
    n: usize,
    weight: impl Fn(usize, usize) -> Option<f64>,
) -> Result<(Vec<Edge>, bool)> {
    let labels: Vec<usize> = (0..n).collect();
    prim_over(&labels, weight)
}

/// Prim restricted to the vertices in `labels`. Weights are looked up and
/// edges reported by label, and ties are broken by label, so the result is
/// the same tree the full graph would give on that vertex subset.
pub(crate) fn prim_over(
    labels: &[usize],
    weight: impl Fn(usize, usize) -> Option<f64>,
) -> Result<(Vec<Edge>, bool)> {
    let n = labels.len();
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    if n == 0 {
        return Ok((edges, false));
    }
    let mut ties = false;
    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut last = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let from = labels[last];
        for u in 0..n {
            if in_tree[u] {
                continue;
            }
            let Some(w) = weight(from, labels[u]) else {
                continue;
            };
            match best[u] {
                None => best[u] = Some((w, from)),
                Some((bw, bp)) => {
                    if near(w, bw) {
                        ties = true;
                    }
                    if edge_cmp(w, from, labels[u], bw, bp, labels[u]) == Ordering::Less {
                        best[u] = Some((w, from));
                    }
                }
            }
        }
        let mut pick: Option<(usize, f64, usize)> = None;
        for u in 0..n {
            if in_tree[u] {
                continue;
            }
            let Some((w, p)) = best[u] else { continue };
            pick = match pick {
                None => Some((u, w, p)),
                Some((cu, cw, cp)) => {
                    if near(w, cw) {
                        ties = true;
                    }
                    if edge_cmp(w, p, labels[u], cw, cp, labels[cu]) == Ordering::Less {
                        Some((u, w, p))
                    } else {
                        Some((cu, cw, cp))
                    }
                }
            };
        }
        let (u, w, p) = pick.ok_or(Error::Disconnected)?;
        in_tree[u] = true;
        edges.push(Edge::new(p, labels[u], w));
        last = u;
    }
    Ok((edges, ties))
}

/// Minimum spanning tree of the graph of known entries selected by `mask`.
pub fn mst(delta: &SquaredDistanceMatrix, mask: &AdjacencyMask) -> Result<MstOutcome> {
    let n = delta.order();
    if mask.n() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            got: (mask.n(), mask.n()),
        });
    }
    for i in 0..n {
        for j in 0..n {
            if mask.is_set(i, j) && !delta.is_known(i, j) {
                return Err(Error::MissingEntries);
            }
        }
    }
    let values = delta.values();
    let (edges, ties) = prim(n, |i, j| mask.is_set(i, j).then(|| values[(i, j)]))?;
    Ok(MstOutcome {
        tree: SpanningTree::new(n, edges)?,
        ties,
    })
}

/// Minimum spanning tree of the complete graph on a fully observed matrix.
pub fn mst_complete(delta: &SquaredDistanceMatrix) -> Result<MstOutcome> {
    let values = delta.ensure_complete()?;
    let n = delta.order();
    let (edges, ties) = prim(n, |i, j| Some(values[(i, j)]))?;
    Ok(MstOutcome {
        tree: SpanningTree::new(n, edges)?,
        ties,
    })
}

/// Whether the minimum spanning tree of `delta` has exactly the edges of `t`.
/// The tree's weights must already agree with `delta`.
pub fn is_mst_preserving(delta: &SquaredDistanceMatrix, t: &SpanningTree) -> Result<bool> {
    let values = delta.ensure_complete()?;
    if delta.order() != t.n() {
        return Err(Error::DimensionMismatch {
            expected: (t.n(), t.n()),
            got: (delta.order(), delta.order()),
        });
    }
    for e in t.edges() {
        let m = values[(e.u, e.v)];
        if (m - e.weight).abs() > WEIGHT_MATCH_TOL * m.abs().max(e.weight.abs()) {
            return Err(Error::WeightMismatch {
                row: e.u,
                col: e.v,
                tree: e.weight,
                matrix: m,
            });
        }
    }
    Ok(mst_complete(delta)?.tree.same_edges(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{edm, Matrix, PointConfiguration};
    use crate::tree::testing::random_tree;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sq(rows: &[[f64; 3]]) -> SquaredDistanceMatrix {
        SquaredDistanceMatrix::new(Matrix::from_rows(rows)).unwrap()
    }

    fn path_tree() -> SpanningTree {
        SpanningTree::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 4.0)]).unwrap()
    }

    /// Minimum total weight over all spanning trees, by enumerating every
    /// (n-1)-subset of edges.
    fn brute_force_min_weight(d: &Matrix) -> f64 {
        let n = d.rows();
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        let mut best = f64::INFINITY;
        let mut chosen = Vec::new();
        fn rec(
            pairs: &[(usize, usize)],
            start: usize,
            need: usize,
            chosen: &mut Vec<(usize, usize)>,
            n: usize,
            d: &Matrix,
            best: &mut f64,
        ) {
            if need == 0 {
                let ok = crate::tree::connected(n, |a, b| chosen.contains(&(a.min(b), a.max(b))));
                if ok {
                    *best = best.min(chosen.iter().map(|&(a, b)| d[(a, b)]).sum());
                }
                return;
            }
            for k in start..pairs.len() {
                chosen.push(pairs[k]);
                rec(pairs, k + 1, need - 1, chosen, n, d, best);
                chosen.pop();
            }
        }
        rec(&pairs, 0, n - 1, &mut chosen, n, d, &mut best);
        best
    }

    #[test]
    fn three_node_example() {
        let d = sq(&[[0.0, 1.0, 4.0], [1.0, 0.0, 2.0], [4.0, 2.0, 0.0]]);
        let out = mst_complete(&d).unwrap();
        assert_eq!(out.tree.edge_pairs(), vec![(0, 1), (1, 2)]);
        assert_eq!(out.tree.weight(1, 2), Some(2.0));
        assert!(!out.ties);
    }

    #[test]
    fn tree_mask_returns_the_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let t = random_tree(9, &mut rng);
        let p = t.to_partial();
        let out = mst(&p.to_matrix(), p.mask()).unwrap();
        assert_eq!(out.tree, t);
    }

    #[test]
    fn matches_exhaustive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..30 {
            let n = 2 + trial % 6;
            let x =
                PointConfiguration::new(Matrix::from_fn(n, 2, |_, _| rng.random_range(0.0..1.0)))
                    .unwrap();
            let d = edm(&x);
            let got = mst_complete(&d).unwrap().tree.total_weight();
            let want = brute_force_min_weight(d.values());
            assert!(
                (got - want).abs() <= 1e-12 * want.max(1.0),
                "n={n}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn ties_resolve_to_smaller_pairs() {
        let d = sq(&[[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]);
        let out = mst_complete(&d).unwrap();
        assert_eq!(out.tree.edge_pairs(), vec![(0, 1), (0, 2)]);
        assert!(out.ties);
    }

    #[test]
    fn disconnected_mask_is_rejected() {
        let d = sq(&[[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]]);
        let mut known = vec![true; 9];
        for k in [2, 5, 6, 7] {
            known[k] = false;
        }
        let partial = SquaredDistanceMatrix::with_missing(d.values().clone(), known).unwrap();
        assert!(matches!(
            prim(3, |i, j| partial.get(i, j)),
            Err(Error::Disconnected)
        ));
    }

    #[test]
    fn preservation_examples() {
        let t = path_tree();
        let short = sq(&[[0.0, 1.0, 2.0], [1.0, 0.0, 4.0], [2.0, 4.0, 0.0]]);
        assert!(!is_mst_preserving(&short, &t).unwrap());
        let long = sq(&[[0.0, 1.0, 5.0], [1.0, 0.0, 4.0], [5.0, 4.0, 0.0]]);
        assert!(is_mst_preserving(&long, &t).unwrap());
        let wrong = sq(&[[0.0, 1.5, 5.0], [1.5, 0.0, 4.0], [5.0, 4.0, 0.0]]);
        assert!(matches!(
            is_mst_preserving(&wrong, &t),
            Err(Error::WeightMismatch { .. })
        ));
    }

    #[test]
    fn self_consistency_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = PointConfiguration::new(Matrix::from_fn(20, 3, |_, _| rng.random_range(0.0..1.0)))
            .unwrap();
        let d = edm(&x);
        let t = mst_complete(&d).unwrap().tree;
        assert!(is_mst_preserving(&d, &t).unwrap());
    }

    proptest! {
        #[test]
        fn scale_and_root_invariance(seed in any::<u64>(), n in 2usize..15, alpha in 0.01f64..100.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = PointConfiguration::new(Matrix::from_fn(n, 3, |_, _| rng.random_range(0.0..1.0)))
                .unwrap();
            let d = edm(&x);
            let base = mst_complete(&d).unwrap().tree;
            let scaled = mst_complete(&d.scaled(alpha).unwrap()).unwrap().tree;
            prop_assert!(base.same_edges(&scaled));
            let roots = SquaredDistanceMatrix::new(Matrix::from_fn(n, n, |i, j| d.values()[(i, j)].sqrt()))
                .unwrap();
            prop_assert!(base.same_edges(&mst_complete(&roots).unwrap().tree));
        }
    }
}
