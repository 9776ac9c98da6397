//! Position-parameterized completion: fit coordinates directly to the known
//! squared distances, starting from randomized shortest-path completions.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::descent::{minimize, DescentOutcome, DescentSettings, Objective};
use super::{CompletionResult, StopReason};
use crate::error::{Error, Result};
use crate::matrix::{
    edm, mds_from_matrix, sq_dist, Matrix, PointConfiguration, SquaredDistanceMatrix,
};
use crate::seed;
use crate::tree::{shortest_paths, PartialDissimilarity};

const RATIO_MEAN: f64 = 1.5;
const RATIO_VARIANCE: f64 = 0.009;

/// The objective counts as zero below this fraction of the summed squared
/// known entries.
const ZERO_OBJECTIVE_REL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpfConfig {
    pub dim: usize,
    /// Number of randomized starting matrices generated and ranked.
    pub candidates: usize,
    /// Iteration cap for each start.
    pub max_iter: usize,
    /// Relative gradient tolerance; see [`DescentSettings::grad_tol`].
    pub grad_tol: f64,
    pub rel_tol: f64,
    pub window: usize,
    /// Further starts tried after the first one stalls above zero.
    pub restarts: usize,
    pub seed: u64,
}

impl NpfConfig {
    pub fn new(dim: usize, seed: u64) -> Self {
        Self {
            dim,
            candidates: 100,
            max_iter: 2000,
            grad_tol: 1e-12,
            rel_tol: 1e-10,
            window: 10,
            restarts: 10,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dim >= 1
            && self.candidates >= 1
            && self.max_iter >= 1
            && self.window >= 1
            && self.restarts >= 1
            && self.grad_tol >= 0.0
            && self.rel_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "invalid optimizer settings: {self:?}"
            )))
        }
    }
}

fn check_dims(x: &PointConfiguration, p: &PartialDissimilarity) -> Result<()> {
    if x.n() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: (p.n(), x.dim()),
            got: (x.n(), x.dim()),
        });
    }
    Ok(())
}

/// `Σ_i Σ_j a_ij (d_ij - ‖x_i - x_j‖²)²` over ordered pairs.
pub fn npf_objective(x: &PointConfiguration, p: &PartialDissimilarity) -> Result<f64> {
    check_dims(x, p)?;
    Ok(value_and_gradient(x.coords(), p, false).0)
}

/// Objective and its gradient with respect to the coordinates.
pub fn npf_gradient(x: &PointConfiguration, p: &PartialDissimilarity) -> Result<(f64, Matrix)> {
    check_dims(x, p)?;
    let (value, g) = value_and_gradient(x.coords(), p, true);
    Ok((value, g.expect("gradient requested")))
}

fn value_and_gradient(
    x: &Matrix,
    p: &PartialDissimilarity,
    want_grad: bool,
) -> (f64, Option<Matrix>) {
    let n = x.rows();
    let dim = x.cols();
    let mut value = 0.0;
    let mut grad = want_grad.then(|| Matrix::zeros(n, dim));
    for i in 0..n {
        for j in p.mask().neighbors(i).filter(|&j| j > i) {
            let r = sq_dist(x.row(i), x.row(j)) - p.values()[(i, j)];
            value += 2.0 * r * r;
            if let Some(g) = grad.as_mut() {
                for k in 0..dim {
                    let step = 8.0 * r * (x[(i, k)] - x[(j, k)]);
                    g[(i, k)] += step;
                    g[(j, k)] -= step;
                }
            }
        }
    }
    (value, grad)
}

/// Draw from `Normal(1.5, 0.009)` restricted to `(0, k]` by rejection.
///
/// When `(0, k]` sits more than six standard deviations below the mean the
/// draw is `k` itself.
pub fn sample_segment_ratio(k: usize, rng: &mut impl Rng) -> f64 {
    let sd = RATIO_VARIANCE.sqrt();
    let upper = k as f64;
    if upper < RATIO_MEAN - 6.0 * sd {
        return upper;
    }
    let normal = Normal::new(RATIO_MEAN, sd).expect("valid normal parameters");
    loop {
        let s = normal.sample(rng);
        if s > 0.0 && s <= upper {
            return s;
        }
    }
}

/// Randomized completions: known entries copied, each unknown entry the
/// squared shortest-path length divided by a sampled segment ratio.
pub fn npf_init(
    p: &PartialDissimilarity,
    count: usize,
    rng: &mut impl Rng,
) -> Result<Vec<SquaredDistanceMatrix>> {
    let n = p.n();
    let paths = shortest_paths(p)?;
    (0..count)
        .map(|_| {
            let mut b = p.values().clone();
            for i in 0..n {
                for j in (i + 1)..n {
                    if !p.mask().is_set(i, j) {
                        let v =
                            paths.squared(i, j) / sample_segment_ratio(paths.segments(i, j), rng);
                        b[(i, j)] = v;
                        b[(j, i)] = v;
                    }
                }
            }
            SquaredDistanceMatrix::new(b)
        })
        .collect()
}

struct Positions<'a> {
    partial: &'a PartialDissimilarity,
    n: usize,
    dim: usize,
}

impl Objective for Positions<'_> {
    fn evaluate(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let coords = Matrix::from_vec(self.n, self.dim, x.to_vec())?;
        let (value, g) = value_and_gradient(&coords, self.partial, true);
        Ok((value, g.expect("gradient requested").as_slice().to_vec()))
    }
}

/// Multi-start descent from the best-ranked randomized completions; stops
/// at the first start that drives the objective to zero.
pub fn npf_complete(p: &PartialDissimilarity, cfg: &NpfConfig) -> Result<CompletionResult> {
    let start = Instant::now();
    cfg.validate()?;
    let n = p.n();
    if cfg.dim > n {
        return Err(Error::InvalidDimension { p: cfg.dim, n });
    }
    let mut rng = seed::rng(cfg.seed);
    let mut ranked = Vec::with_capacity(cfg.candidates);
    for b in npf_init(p, cfg.candidates, &mut rng)? {
        let x = mds_from_matrix(b.values(), cfg.dim)?.points;
        let f = value_and_gradient(x.coords(), p, false).0;
        ranked.push((f, x));
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0));

    let scale: f64 = p.values().as_slice().iter().map(|d| d * d).sum();
    let settings = DescentSettings {
        max_iter: cfg.max_iter,
        rel_tol: cfg.rel_tol,
        window: cfg.window,
        zero_objective: ZERO_OBJECTIVE_REL * scale,
        grad_tol: cfg.grad_tol,
        ..DescentSettings::default()
    };
    let mut problem = Positions {
        partial: p,
        n,
        dim: cfg.dim,
    };
    let mut best: Option<DescentOutcome> = None;
    let mut iterations = 0;
    for (attempt, (_, x0)) in ranked.into_iter().take(cfg.restarts + 1).enumerate() {
        let out = minimize(
            &mut problem,
            x0.into_coords().as_slice().to_vec(),
            &settings,
        )?;
        iterations += out.iterations;
        log::debug!("npf start {attempt}: {:?} at {:e}", out.stop, out.value);
        let done = out.stop == StopReason::ZeroObjective;
        if best.as_ref().is_none_or(|b| out.value < b.value) {
            best = Some(out);
        }
        if done {
            break;
        }
    }
    let best = best.expect("at least one start");
    let points = PointConfiguration::new(Matrix::from_vec(n, cfg.dim, best.x)?)?;
    Ok(CompletionResult {
        matrix: edm(&points),
        points,
        objective: best.value,
        iterations,
        converged: best.stop == StopReason::ZeroObjective,
        stop: best.stop,
        duration: start.elapsed(),
    })
}
