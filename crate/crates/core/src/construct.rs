//! Constructive completion: points are placed one at a time along the target
//! tree, each at the prescribed distance from its tree neighbor in a random
//! direction, and proposals that would change the minimum spanning tree of
//! the placed points are rejected.

use std::cmp::Ordering;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix, PointConfiguration};
use crate::seed;
use crate::tree::SpanningTree;

/// Proposals whose new off-tree distance falls this close (relative) to the
/// deciding tree edge, without equalling it, are rejected.
const NEAR_TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstructiveConfig {
    pub dim: usize,
    pub max_in: usize,
    pub max_out: usize,
    pub seed: u64,
}

impl ConstructiveConfig {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            max_in: 100,
            max_out: 100,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.max_in == 0 || self.max_out == 0 {
            return Err(Error::InvalidConfig(format!(
                "dimension, max-in and max-out must be positive (got {}, {}, {})",
                self.dim, self.max_in, self.max_out
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionResult {
    /// On failure, the configuration of the last attempt; unplaced points sit
    /// at the origin.
    pub points: PointConfiguration,
    pub converged: bool,
    /// Proposals rejected over all attempts.
    pub rejections: usize,
    /// Attempts abandoned before the successful one (or all of them).
    pub restarts: usize,
    /// Points placed in the final attempt.
    pub placed: usize,
}

/// Uniform random unit vector in `ℝ^p`.
pub fn sample_sphere(p: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let z: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 && norm.is_finite() {
            return z.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// The placed vertex with the most tree edges to unplaced vertices (smallest
/// index on ties) and those unplaced neighbors, highest tree degree first.
pub fn get_buds(placed: &[bool], t: &SpanningTree) -> Result<(usize, Vec<usize>)> {
    let mut best: Option<(usize, usize)> = None;
    for g in (0..t.n()).filter(|&v| placed[v]) {
        let count = t.neighbors(g).iter().filter(|&&(b, _)| !placed[b]).count();
        if count > 0 && best.is_none_or(|(_, c)| count > c) {
            best = Some((g, count));
        }
    }
    let (g, _) = best.ok_or(Error::NoUnplacedVertices)?;
    let mut buds: Vec<usize> = t
        .neighbors(g)
        .iter()
        .map(|&(b, _)| b)
        .filter(|&b| !placed[b])
        .collect();
    buds.sort_by(|&a, &b| t.degree(b).cmp(&t.degree(a)).then(a.cmp(&b)));
    Ok((g, buds))
}

/// Tree edge identified by weight and sorted endpoints, ordered the same way
/// the minimum spanning tree code breaks ties.
#[derive(Debug, Clone, Copy)]
struct EdgeKey {
    weight: f64,
    pair: (usize, usize),
}

impl EdgeKey {
    fn new(weight: f64, a: usize, b: usize) -> Self {
        Self {
            weight,
            pair: (a.min(b), a.max(b)),
        }
    }

    fn cmp(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.pair.cmp(&other.pair))
    }
}

/// Outcome of one attempt to place a bud.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub accepted: bool,
    pub rejections: usize,
}

/// Points placed so far in one attempt.
///
/// Instead of recomputing a minimum spanning tree for every proposal, the
/// state keeps, for each pair of placed vertices, the heaviest edge on their
/// tree path. The placed tree stays minimal exactly when every new distance
/// beats the heaviest edge on the corresponding path, which is the cycle
/// property under the same edge order.
#[derive(Debug, Clone)]
pub struct GrowthState<'t> {
    tree: &'t SpanningTree,
    coords: Matrix,
    placed: Vec<bool>,
    order: Vec<usize>,
    heaviest: Vec<Option<EdgeKey>>,
}

impl<'t> GrowthState<'t> {
    /// Places the root, a vertex of maximal degree (smallest index on ties), at
    /// the origin.
    pub fn new(tree: &'t SpanningTree, dim: usize) -> Self {
        let n = tree.n();
        let root = (0..n)
            .max_by(|&a, &b| tree.degree(a).cmp(&tree.degree(b)).then(b.cmp(&a)))
            .unwrap_or(0);
        let mut placed = vec![false; n];
        placed[root] = true;
        Self {
            tree,
            coords: Matrix::zeros(n, dim),
            placed,
            order: vec![root],
            heaviest: vec![None; n * n],
        }
    }

    pub fn placed(&self) -> &[bool] {
        &self.placed
    }

    /// Placed vertices in placement order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn is_complete(&self) -> bool {
        self.order.len() == self.tree.n()
    }

    pub fn coords(&self) -> &Matrix {
        &self.coords
    }

    /// Proposes `x_b = x_g + z·√w_gb` up to `max_in` times and keeps the
    /// first proposal that leaves the placed tree minimal.
    pub fn grow(
        &mut self,
        g: usize,
        b: usize,
        max_in: usize,
        rng: &mut impl Rng,
    ) -> Result<Placement> {
        let w = self.tree.weight(g, b).ok_or(Error::EdgeNotInTree(g, b))?;
        if !self.placed[g] || self.placed[b] {
            return Err(Error::InvalidConfig(format!("cannot grow {b} from {g}")));
        }
        let n = self.tree.n();
        let dim = self.coords.cols();
        let radius = w.sqrt();
        let mut proposal = vec![0.0; dim];
        for attempt in 0..max_in {
            let z = sample_sphere(dim, rng);
            for ((p, x), zk) in proposal.iter_mut().zip(self.coords.row(g)).zip(&z) {
                *p = x + zk * radius;
            }
            // Placed edges are keyed by their realized lengths, which can
            // differ from the tree weights by rounding. Duplicate points
            // then tie with them exactly and fall back on the pair order.
            let new_edge = EdgeKey::new(sq_dist(&proposal, self.coords.row(g)), g, b);
            let ok = self.order.iter().filter(|&&k| k != g).all(|&k| {
                let d = sq_dist(&proposal, self.coords.row(k));
                let path_max = match self.heaviest[g * n + k] {
                    Some(h) if h.cmp(&new_edge) == Ordering::Greater => h,
                    _ => new_edge,
                };
                let gap = (d - path_max.weight).abs();
                if gap > 0.0 && gap <= NEAR_TIE_TOL * path_max.weight {
                    return false;
                }
                EdgeKey::new(d, b, k).cmp(&path_max) == Ordering::Greater
            });
            if ok {
                self.accept(g, b, new_edge, &proposal);
                return Ok(Placement {
                    accepted: true,
                    rejections: attempt,
                });
            }
        }
        Ok(Placement {
            accepted: false,
            rejections: max_in,
        })
    }

    fn accept(&mut self, g: usize, b: usize, new_edge: EdgeKey, x: &[f64]) {
        let n = self.tree.n();
        self.coords.row_mut(b).copy_from_slice(x);
        for &k in &self.order {
            let h = match self.heaviest[g * n + k] {
                Some(h) if h.cmp(&new_edge) == Ordering::Greater => h,
                _ => new_edge,
            };
            self.heaviest[b * n + k] = Some(h);
            self.heaviest[k * n + b] = Some(h);
        }
        self.placed[b] = true;
        self.order.push(b);
        #[cfg(debug_assertions)]
        self.check_placed_tree();
    }

    /// Recomputes the minimum spanning tree of the placed points and checks
    /// that it is contained in the target.
    #[cfg(debug_assertions)]
    fn check_placed_tree(&self) {
        let (edges, _) = crate::tree::prim_over(&self.order, |a, c| {
            Some(sq_dist(self.coords.row(a), self.coords.row(c)))
        })
        .expect("complete graph");
        debug_assert!(
            edges.iter().all(|e| self.tree.contains(e.u, e.v)),
            "placed points left the target tree"
        );
    }
}

/// Builds a configuration in `ℝ^dim` whose distances have `t` as their minimum
/// spanning tree, with the tree's weights as squared edge lengths.
pub fn mst_configure(t: &SpanningTree, cfg: &ConstructiveConfig) -> Result<ConstructionResult> {
    cfg.validate()?;
    let mut rejections = 0;
    let mut last = None;
    for attempt in 0..cfg.max_out {
        let mut rng = seed::rng(seed::mix(cfg.seed, attempt as u64));
        let mut state = GrowthState::new(t, cfg.dim);
        'grow: while !state.is_complete() {
            let (g, buds) = get_buds(state.placed(), t)?;
            for b in buds {
                let placement = state.grow(g, b, cfg.max_in, &mut rng)?;
                rejections += placement.rejections;
                if !placement.accepted {
                    break 'grow;
                }
            }
        }
        let placed = state.order().len();
        let converged = state.is_complete();
        let points = PointConfiguration::new(state.coords().clone())?;
        if converged {
            return Ok(ConstructionResult {
                points,
                converged,
                rejections,
                restarts: attempt,
                placed,
            });
        }
        log::debug!(
            "construction attempt {attempt} stalled after {placed} of {} points",
            t.n()
        );
        last = Some((points, placed));
    }
    let (points, placed) = last.expect("max_out is positive");
    Ok(ConstructionResult {
        points,
        converged: false,
        rejections,
        restarts: cfg.max_out,
        placed,
    })
}
