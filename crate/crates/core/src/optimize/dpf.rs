//! Dissimilarity-parameterized completion: minimize `F_p(tau(Δ))` over the
//! free entries of `Δ` inside a box.

use std::time::Instant;

use rand::Rng;

use super::descent::{minimize, DescentSettings, Objective};
use super::fp::{gradient_from_decomposition, FpForm};
use super::CompletionResult;
use crate::error::{Error, Result};
use crate::matrix::classical_mds;
use crate::matrix::{eig_sym_leading, tau_matrix, Matrix, SquaredDistanceMatrix};
use crate::seed;
use crate::tree::{
    mst_lower_bounds, shortest_path_upper_bounds, BoundsPair, PartialDissimilarity, SpanningTree,
    UpperBound,
};

/// Off-tree lower bounds are raised by this factor so completed distances
/// strictly exceed the tree edges that decide them.
const STRICTNESS_MARGIN: f64 = 1e-9;

/// The objective counts as zero below this fraction of `‖tau(Δ₀)‖²`.
const ZERO_OBJECTIVE_REL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DpfConfig {
    pub dim: usize,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub window: usize,
    pub sufficient_decrease: f64,
    pub shrink: f64,
    pub form: FpForm,
    pub seed: u64,
}

impl DpfConfig {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            max_iter: 5000,
            rel_tol: 1e-10,
            window: 10,
            sufficient_decrease: 1e-4,
            shrink: 0.5,
            form: FpForm::Projection,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dim >= 1
            && self.max_iter >= 1
            && self.window >= 1
            && self.rel_tol > 0.0
            && self.sufficient_decrease > 0.0
            && self.sufficient_decrease < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid optimizer settings: {self:?}"
            )))
        }
    }
}

/// `F_p ∘ tau` as a function of the free entries of a bounded dissimilarity
/// matrix, one variable per unordered pair.
#[derive(Debug, Clone)]
pub struct DpfProblem {
    bounds: BoundsPair,
    dim: usize,
    form: FpForm,
    free: Vec<(usize, usize)>,
    base: Matrix,
}

impl DpfProblem {
    pub fn new(bounds: BoundsPair, dim: usize, form: FpForm) -> Result<Self> {
        let n = bounds.n();
        if dim == 0 || dim > n {
            return Err(Error::InvalidDimension { p: dim, n });
        }
        let mut free = Vec::new();
        let mut base = Matrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                if bounds.is_pinned(i, j) {
                    base[(i, j)] = bounds.lower(i, j);
                    base[(j, i)] = bounds.lower(i, j);
                } else {
                    free.push((i, j));
                }
            }
        }
        Ok(Self {
            bounds,
            dim,
            form,
            free,
            base,
        })
    }

    pub fn free_pairs(&self) -> &[(usize, usize)] {
        &self.free
    }

    pub fn bounds(&self) -> &BoundsPair {
        &self.bounds
    }

    /// The full matrix with `x` in the free entries.
    pub fn assemble(&self, x: &[f64]) -> Matrix {
        let mut delta = self.base.clone();
        for (&(i, j), &v) in self.free.iter().zip(x) {
            delta[(i, j)] = v;
            delta[(j, i)] = v;
        }
        delta
    }

    /// Free entries of a full matrix.
    pub fn extract(&self, delta: &Matrix) -> Vec<f64> {
        self.free.iter().map(|&(i, j)| delta[(i, j)]).collect()
    }

    pub fn project(&self, x: &mut [f64]) {
        for (v, &(i, j)) in x.iter_mut().zip(&self.free) {
            *v = self.bounds.clamp(i, j, *v);
        }
    }

    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let s = tau_matrix(&self.assemble(x));
        super::fp::fp_objective(&s, self.dim, self.form)
    }

    /// Objective and gradient with respect to the free entries.
    pub fn gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let s = tau_matrix(&self.assemble(x));
        let eig = eig_sym_leading(&s, self.dim)?;
        let (value, g) = gradient_from_decomposition(&s, &eig, self.dim, self.form);
        // tau(Δ) = -½ PΔP, so moving δ_ij and δ_ji together changes F by
        // -(P G P)_ij per unit.
        let pgp = g.double_centered();
        Ok((
            value,
            self.free.iter().map(|&(i, j)| -pgp[(i, j)]).collect(),
        ))
    }

    /// Uniform draw in `[L, min(U, anchor)]` for every free entry.
    pub fn random_point(&self, anchor: &Matrix, rng: &mut impl Rng) -> Vec<f64> {
        self.free
            .iter()
            .map(|&(i, j)| {
                let lo = self.bounds.lower(i, j);
                let hi = self.bounds.upper(i, j).clamp(anchor[(i, j)]).max(lo);
                if hi > lo {
                    rng.random_range(lo..=hi)
                } else {
                    lo
                }
            })
            .collect()
    }
}

impl Objective for DpfProblem {
    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.gradient(x)
    }

    fn project(&self, x: &mut [f64]) {
        DpfProblem::project(self, x)
    }
}

/// Known entries pinned, free entries in `[0, ∞)`.
pub fn dpf_bounds(p: &PartialDissimilarity) -> BoundsPair {
    BoundsPair::pinned(p)
}

/// Tree entries pinned; every other entry between the largest edge on its
/// tree path (raised by a tiny margin) and the triangle-inequality bound.
pub fn dpflb_bounds(t: &SpanningTree) -> Result<BoundsPair> {
    let n = t.n();
    let minimax = mst_lower_bounds(t);
    let upper = shortest_path_upper_bounds(&t.to_partial())?;
    let mut lower = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let u = upper.values()[(i, j)];
            lower[(i, j)] = match t.weight(i, j) {
                Some(w) => w,
                None => (minimax.values()[(i, j)] * (1.0 + STRICTNESS_MARGIN)).min(u),
            };
        }
    }
    BoundsPair::new(
        lower,
        upper
            .values()
            .as_slice()
            .iter()
            .map(|&u| UpperBound::Finite(u))
            .collect(),
    )
}

/// Minimizes `F_p(tau(Δ))` over the box, starting from a random point below
/// the triangle-inequality bounds of the known graph.
pub fn dpf_complete(
    p: &PartialDissimilarity,
    bounds: &BoundsPair,
    cfg: &DpfConfig,
) -> Result<CompletionResult> {
    let start = Instant::now();
    cfg.validate()?;
    bounds.ensure_pins(p)?;
    let anchor = shortest_path_upper_bounds(p)?;
    let mut problem = DpfProblem::new(bounds.clone(), cfg.dim, cfg.form)?;
    let mut rng = seed::rng(cfg.seed);
    let x0 = problem.random_point(anchor.values(), &mut rng);
    let scale = tau_matrix(&problem.assemble(&x0)).frobenius_norm_sq();
    let settings = DescentSettings {
        max_iter: cfg.max_iter,
        rel_tol: cfg.rel_tol,
        window: cfg.window,
        zero_objective: ZERO_OBJECTIVE_REL * scale,
        sufficient_decrease: cfg.sufficient_decrease,
        shrink: cfg.shrink,
        ..DescentSettings::default()
    };
    let out = minimize(&mut problem, x0, &settings)?;
    let matrix = SquaredDistanceMatrix::new(problem.assemble(&out.x))?;
    let points = classical_mds(&matrix, cfg.dim)?;
    log::debug!(
        "dpf finished after {} iterations ({:?}), objective {:e}",
        out.iterations,
        out.stop,
        out.value
    );
    Ok(CompletionResult {
        matrix,
        points,
        objective: out.value,
        iterations: out.iterations,
        converged: out.stop.converged(),
        stop: out.stop,
        duration: start.elapsed(),
    })
}

/// DPF on the tree's entries with bounds that keep the tree minimal.
pub fn dpflb_complete(t: &SpanningTree, cfg: &DpfConfig) -> Result<CompletionResult> {
    dpf_complete(&t.to_partial(), &dpflb_bounds(t)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{edm, PointConfiguration};
    use crate::optimize::StopReason;
    use crate::tree::testing::random_tree;
    use crate::tree::{is_mst_preserving, mst_complete, AdjacencyMask, Edge};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, p: usize, seed: u64) -> PointConfiguration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointConfiguration::new(Matrix::from_fn(n, p, |_, _| rng.random_range(0.0..1.0))).unwrap()
    }

    #[test]
    fn nothing_free_means_nothing_to_do() {
        let d = edm(&random_points(6, 2, 1));
        let p = PartialDissimilarity::from_matrix(&d).unwrap();
        let out = dpf_complete(&p, &dpf_bounds(&p), &DpfConfig::new(2, 0)).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.stop, StopReason::NoFreeVariables);
        assert_eq!(out.matrix, d);
        assert!(out.objective < 1e-20 * d.values().frobenius_norm_sq());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for form in [FpForm::Projection, FpForm::Literal] {
            let t = random_tree(7, &mut rng);
            let problem = DpfProblem::new(dpflb_bounds(&t).unwrap(), 2, form).unwrap();
            let anchor = shortest_path_upper_bounds(&t.to_partial()).unwrap();
            let x = problem.random_point(anchor.values(), &mut rng);
            let (_, g) = problem.gradient(&x).unwrap();
            for k in 0..x.len() {
                let h = 1e-6 * x[k].max(1.0);
                let mut up = x.clone();
                up[k] += h;
                let mut down = x.clone();
                down[k] -= h;
                let fd = (problem.objective(&up).unwrap() - problem.objective(&down).unwrap())
                    / (2.0 * h);
                assert!(
                    (fd - g[k]).abs() < 1e-5 * g[k].abs().max(1.0),
                    "{form:?} {k}: {fd} vs {}",
                    g[k]
                );
            }
        }
    }

    #[test]
    fn recovers_a_single_missing_entry() {
        // Five planar points with one distance hidden: rank two pins it down.
        let x = PointConfiguration::new(Matrix::from_rows(&[
            [0.0, 0.0],
            [1.0, 0.2],
            [0.3, 1.1],
            [1.4, 1.3],
            [0.7, -0.6],
        ]))
        .unwrap();
        let d = edm(&x);
        let mut bits: Vec<bool> = (0..25).map(|k| k / 5 != k % 5).collect();
        bits[2 * 5 + 4] = false;
        bits[4 * 5 + 2] = false;
        let p = PartialDissimilarity::restrict(&d, AdjacencyMask::new(5, bits).unwrap()).unwrap();
        let out = dpf_complete(&p, &dpf_bounds(&p), &DpfConfig::new(2, 3)).unwrap();
        let want = d.values()[(2, 4)];
        // Brute-force scan of the objective over the single free entry.
        let problem = DpfProblem::new(dpf_bounds(&p), 2, FpForm::Projection).unwrap();
        let scan = (0..=4000)
            .map(|k| k as f64 * 1e-3)
            .min_by(|a, b| {
                problem
                    .objective(&[*a])
                    .unwrap()
                    .total_cmp(&problem.objective(&[*b]).unwrap())
            })
            .unwrap();
        assert!((scan - want).abs() < 1e-3);
        assert!(
            (out.matrix.values()[(2, 4)] - want).abs() < 1e-4,
            "{} vs {want}",
            out.matrix.values()[(2, 4)]
        );
    }

    #[test]
    fn three_node_path_stays_in_its_interval() {
        let t = SpanningTree::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 4.0)]).unwrap();
        let out = dpflb_complete(&t, &DpfConfig::new(2, 0)).unwrap();
        let v = out.matrix.values()[(0, 2)];
        assert!((4.0 * (1.0 + STRICTNESS_MARGIN)..=9.0).contains(&v), "{v}");
        assert!(is_mst_preserving(&out.matrix, &t).unwrap());
    }

    #[test]
    fn dpflb_preserves_trees_from_uniform_points() {
        for seed in 0..3 {
            let d = edm(&random_points(20, 3, seed));
            let t = mst_complete(&d).unwrap().tree;
            let out = dpflb_complete(&t, &DpfConfig::new(3, seed)).unwrap();
            assert!(is_mst_preserving(&out.matrix, &t).unwrap());
            let b = dpflb_bounds(&t).unwrap();
            for i in 0..20 {
                for j in 0..20 {
                    assert!(b.contains(i, j, out.matrix.values()[(i, j)]));
                }
            }
        }
    }

    #[test]
    fn inverted_bounds_are_rejected() {
        let lower = Matrix::from_rows(&[[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]]);
        let upper = Matrix::from_rows(&[[0.0, 1.0, 4.0], [1.0, 0.0, 1.0], [4.0, 1.0, 0.0]]);
        assert!(matches!(
            BoundsPair::from_matrices(&lower, &upper),
            Err(Error::InconsistentBounds { .. })
        ));
    }

    #[test]
    fn descent_direction_decreases_the_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let t = random_tree(12, &mut rng);
        let problem = DpfProblem::new(dpflb_bounds(&t).unwrap(), 2, FpForm::Projection).unwrap();
        let anchor = shortest_path_upper_bounds(&t.to_partial()).unwrap();
        for _ in 0..10 {
            let x = problem.random_point(anchor.values(), &mut rng);
            let (f, g) = problem.gradient(&x).unwrap();
            let mut y: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - 1e-6 * b).collect();
            problem.project(&mut y);
            if y != x {
                assert!(problem.objective(&y).unwrap() < f);
            }
        }
    }
}
