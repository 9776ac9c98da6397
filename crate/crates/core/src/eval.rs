//! Accuracy and tree-fidelity metrics, and single timed trials.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::construct::{mst_configure, ConstructiveConfig};
use crate::error::{Error, Result};
use crate::matrix::{edm, PointConfiguration, SquaredDistanceMatrix};
use crate::optimize::{
    dpf_bounds, dpf_complete, dpflb_complete, npf_complete, DpfConfig, NpfConfig,
};
use crate::tree::{mst, mst_complete, AdjacencyMask, PartialDissimilarity, SpanningTree};

/// `‖D - D̂‖_F² / ‖D‖_F²`.
pub fn rdd(d: &SquaredDistanceMatrix, dhat: &SquaredDistanceMatrix) -> Result<f64> {
    let reference = d.ensure_complete()?;
    let estimate = dhat.ensure_complete()?;
    let num = reference.sub(estimate)?.frobenius_norm_sq();
    let den = reference.frobenius_norm_sq();
    if den == 0.0 {
        return if num == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::ZeroReference)
        };
    }
    Ok(num / den)
}

/// Share of the edges of `t` that are also in the minimum spanning tree of
/// `dhat`.
pub fn mst_edge_retention(t: &SpanningTree, dhat: &SquaredDistanceMatrix) -> Result<f64> {
    Ok(retention_against(t, &completed_mst(t, dhat)?.tree))
}

/// `(Σ d_i - Σ d̂_i)² / Σ d_i²` over the edge weights of `t` and of the
/// minimum spanning tree of `dhat`.
pub fn mst_distance_ratio(t: &SpanningTree, dhat: &SquaredDistanceMatrix) -> Result<f64> {
    Ok(ratio_against(t, &completed_mst(t, dhat)?.tree))
}

fn completed_mst(
    t: &SpanningTree,
    dhat: &SquaredDistanceMatrix,
) -> Result<crate::tree::MstOutcome> {
    if dhat.order() != t.n() {
        return Err(Error::DimensionMismatch {
            expected: (t.n(), t.n()),
            got: (dhat.order(), dhat.order()),
        });
    }
    mst_complete(dhat)
}

fn retention_against(t: &SpanningTree, other: &SpanningTree) -> f64 {
    if t.n() < 2 {
        return 1.0;
    }
    let kept = other
        .edges()
        .iter()
        .filter(|e| t.contains(e.u, e.v))
        .count();
    kept as f64 / (t.n() - 1) as f64
}

fn ratio_against(t: &SpanningTree, other: &SpanningTree) -> f64 {
    let den: f64 = t.edges().iter().map(|e| e.weight * e.weight).sum();
    if den == 0.0 {
        return 0.0;
    }
    (t.total_weight() - other.total_weight()).powi(2) / den
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    C,
    Dpf,
    Dpflb,
    Npf,
    /// Returns the known entries unchanged; needs a fully observed matrix.
    Identity,
}

impl Method {
    pub const COMPLETION_METHODS: [Method; 4] =
        [Method::C, Method::Dpf, Method::Dpflb, Method::Npf];

    pub fn label(self) -> &'static str {
        match self {
            Method::C => "c",
            Method::Dpf => "dpf",
            Method::Dpflb => "dpflb",
            Method::Npf => "npf",
            Method::Identity => "identity",
        }
    }

    /// C and DPFLB only see the tree.
    pub fn needs_tree_mask(self) -> bool {
        matches!(self, Method::C | Method::Dpflb)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c" => Ok(Method::C),
            "dpf" => Ok(Method::Dpf),
            "dpflb" => Ok(Method::Dpflb),
            "npf" => Ok(Method::Npf),
            "identity" => Ok(Method::Identity),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

/// Ground truth plus what a method is allowed to see.
#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub truth: SquaredDistanceMatrix,
    pub partial: PartialDissimilarity,
    /// Minimum spanning tree of the known entries.
    pub tree: SpanningTree,
    pub tree_ties: bool,
}

impl Instance {
    pub fn new(
        label: impl Into<String>,
        truth: SquaredDistanceMatrix,
        mask: AdjacencyMask,
    ) -> Result<Self> {
        truth.ensure_complete()?;
        let outcome = mst(&truth, &mask)?;
        let partial = PartialDissimilarity::restrict(&truth, mask)?;
        Ok(Self {
            label: label.into(),
            truth,
            partial,
            tree: outcome.tree,
            tree_ties: outcome.ties,
        })
    }

    /// Truth masked to its own minimum spanning tree.
    pub fn mst_masked(label: impl Into<String>, truth: SquaredDistanceMatrix) -> Result<Self> {
        let outcome = mst_complete(&truth)?;
        let mask = AdjacencyMask::from_tree(&outcome.tree);
        Self::new(label, truth, mask)
    }

    pub fn n(&self) -> usize {
        self.truth.order()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialConfig {
    pub method: Method,
    pub dim: usize,
    pub max_in: usize,
    pub max_out: usize,
}

impl TrialConfig {
    pub fn new(method: Method, dim: usize) -> Self {
        let defaults = ConstructiveConfig::new(dim, 0);
        Self {
            method,
            dim,
            max_in: defaults.max_in,
            max_out: defaults.max_out,
        }
    }
}

/// Output of one method run.
#[derive(Debug, Clone)]
pub struct Completion {
    pub matrix: SquaredDistanceMatrix,
    pub points: PointConfiguration,
    pub converged: bool,
    pub seconds: f64,
}

/// Runs one method on the known entries. C and DPFLB need them to form a
/// spanning tree.
pub fn complete(
    cfg: &TrialConfig,
    partial: &PartialDissimilarity,
    seed: u64,
) -> Result<Completion> {
    let tree = if cfg.method.needs_tree_mask() {
        if partial.mask().pair_count() + 1 != partial.n() {
            return Err(Error::InvalidConfig(format!(
                "{} needs the known entries to form a spanning tree",
                cfg.method
            )));
        }
        Some(mst(&partial.to_matrix(), partial.mask())?.tree)
    } else {
        None
    };
    let start = Instant::now();
    let (matrix, points, converged) = match cfg.method {
        Method::C => {
            let ccfg = ConstructiveConfig {
                dim: cfg.dim,
                max_in: cfg.max_in,
                max_out: cfg.max_out,
                seed,
            };
            let out = mst_configure(tree.as_ref().expect("checked above"), &ccfg)?;
            (edm(&out.points), out.points, out.converged)
        }
        Method::Dpf => {
            let out = dpf_complete(
                partial,
                &dpf_bounds(partial),
                &DpfConfig::new(cfg.dim, seed),
            )?;
            (out.matrix, out.points, out.converged)
        }
        Method::Dpflb => {
            let out = dpflb_complete(
                tree.as_ref().expect("checked above"),
                &DpfConfig::new(cfg.dim, seed),
            )?;
            (out.matrix, out.points, out.converged)
        }
        Method::Npf => {
            let out = npf_complete(partial, &NpfConfig::new(cfg.dim, seed))?;
            (out.matrix, out.points, out.converged)
        }
        Method::Identity => {
            let matrix = partial.to_matrix();
            matrix.ensure_complete()?;
            let points = crate::matrix::classical_mds(&matrix, cfg.dim)?;
            (matrix, points, true)
        }
    };
    Ok(Completion {
        matrix,
        points,
        converged,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub seed: u64,
    pub instance: String,
    pub dim: usize,
    pub converged: bool,
    pub rdd: Option<f64>,
    pub mst_edge_retention: Option<f64>,
    pub mst_distance_ratio: Option<f64>,
    /// Ties met while building either minimum spanning tree.
    pub ties: bool,
    pub seconds: f64,
    pub error: Option<String>,
}

impl EvalReport {
    /// Copy with the wall-clock time zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        Self {
            seconds: 0.0,
            ..self.clone()
        }
    }
}

/// Runs one method, times it and scores it against the ground truth.
/// Failures end up in the report's `error` field.
pub fn run_trial(cfg: &TrialConfig, instance: &Instance, seed: u64) -> EvalReport {
    let mut report = EvalReport {
        method: cfg.method,
        seed,
        instance: instance.label.clone(),
        dim: cfg.dim,
        converged: false,
        rdd: None,
        mst_edge_retention: None,
        mst_distance_ratio: None,
        ties: instance.tree_ties,
        seconds: 0.0,
        error: None,
    };
    let start = Instant::now();
    let scored = complete(cfg, &instance.partial, seed).and_then(|c| {
        let hat = completed_mst(&instance.tree, &c.matrix)?;
        Ok((c, hat))
    });
    report.seconds = start.elapsed().as_secs_f64();
    match scored {
        Ok((c, hat)) => {
            report.converged = c.converged;
            report.ties |= hat.ties;
            report.mst_edge_retention = Some(retention_against(&instance.tree, &hat.tree));
            report.mst_distance_ratio = Some(ratio_against(&instance.tree, &hat.tree));
            match rdd(&instance.truth, &c.matrix) {
                Ok(v) => report.rdd = Some(v),
                Err(e) => report.error = Some(e.to_string()),
            }
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;
    use crate::tree::testing::random_tree;
    use crate::tree::Edge;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sdm(rows: &[[f64; 3]]) -> SquaredDistanceMatrix {
        SquaredDistanceMatrix::new(Matrix::from_rows(rows)).unwrap()
    }

    fn random_points(n: usize, p: usize, rng: &mut impl Rng) -> PointConfiguration {
        PointConfiguration::new(Matrix::from_fn(n, p, |_, _| rng.random_range(0.0..1.0))).unwrap()
    }

    #[test]
    fn rdd_examples() {
        let d = SquaredDistanceMatrix::new(Matrix::from_rows(&[[0.0, 4.0], [4.0, 0.0]])).unwrap();
        let hat = SquaredDistanceMatrix::new(Matrix::from_rows(&[[0.0, 5.0], [5.0, 0.0]])).unwrap();
        assert_eq!(rdd(&d, &d).unwrap(), 0.0);
        assert_eq!(rdd(&d, &SquaredDistanceMatrix::zeros(2)).unwrap(), 1.0);
        // 2·1² / 2·4²
        assert_eq!(rdd(&d, &hat).unwrap(), 0.0625);
        let zero = SquaredDistanceMatrix::zeros(2);
        assert!(matches!(rdd(&zero, &hat), Err(Error::ZeroReference)));
        assert_eq!(rdd(&zero, &zero).unwrap(), 0.0);
    }

    #[test]
    fn rdd_is_scale_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = edm(&random_points(8, 3, &mut rng));
        let hat = edm(&random_points(8, 3, &mut rng));
        for alpha in [0.01, 3.0, 1e4] {
            let a = rdd(&d, &hat).unwrap();
            let b = rdd(&d.scaled(alpha).unwrap(), &hat.scaled(alpha).unwrap()).unwrap();
            assert!((a - b).abs() <= 1e-12 * a);
        }
    }

    #[test]
    fn retention_on_a_three_node_path() {
        let t = SpanningTree::new(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 4.0)]).unwrap();
        let keep = sdm(&[[0.0, 1.0, 9.0], [1.0, 0.0, 4.0], [9.0, 4.0, 0.0]]);
        assert_eq!(mst_edge_retention(&t, &keep).unwrap(), 1.0);
        assert_eq!(mst_distance_ratio(&t, &keep).unwrap(), 0.0);
        // The shortcut (0, 2) = 2 replaces the heavier edge (1, 2).
        let cut = sdm(&[[0.0, 1.0, 2.0], [1.0, 0.0, 4.0], [2.0, 4.0, 0.0]]);
        assert_eq!(mst_edge_retention(&t, &cut).unwrap(), 0.5);
        assert_eq!(mst_distance_ratio(&t, &cut).unwrap(), 4.0 / 17.0);
    }

    #[test]
    fn doubled_unit_tree_gives_n_minus_one() {
        let n = 6;
        let edges = (1..n).map(|v| Edge::new(v - 1, v, 1.0)).collect();
        let t = SpanningTree::new(n, edges).unwrap();
        // Path metric with every edge doubled.
        let hat =
            SquaredDistanceMatrix::new(Matrix::from_fn(n, n, |i, j| 2.0 * i.abs_diff(j) as f64))
                .unwrap();
        let r = mst_distance_ratio(&t, &hat).unwrap();
        assert!((r - (n - 1) as f64).abs() < 1e-12);
    }

    #[test]
    fn metrics_match_direct_set_computation() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let n = rng.random_range(3..12);
            let t = random_tree(n, &mut rng);
            let hat = edm(&random_points(n, 2, &mut rng));
            let other = mst_complete(&hat).unwrap().tree;
            let shared: std::collections::BTreeSet<_> = t
                .edge_pairs()
                .into_iter()
                .collect::<std::collections::BTreeSet<_>>()
                .intersection(&other.edge_pairs().into_iter().collect())
                .copied()
                .collect();
            let want = shared.len() as f64 / (n - 1) as f64;
            assert_eq!(mst_edge_retention(&t, &hat).unwrap(), want);
            let sd: f64 = t.edges().iter().map(|e| e.weight).sum();
            let sh: f64 = other.edges().iter().map(|e| e.weight).sum();
            let sq: f64 = t.edges().iter().map(|e| e.weight * e.weight).sum();
            let r = mst_distance_ratio(&t, &hat).unwrap();
            assert!((r - (sd - sh).powi(2) / sq).abs() <= 1e-12 * r.max(1e-12));
            assert!((0.0..=1.0).contains(&mst_edge_retention(&t, &hat).unwrap()));
        }
    }

    #[test]
    fn identity_trial_on_a_full_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = edm(&random_points(10, 3, &mut rng));
        let inst = Instance::new("full", d, AdjacencyMask::complete(10)).unwrap();
        let r = run_trial(&TrialConfig::new(Method::Identity, 3), &inst, 0);
        assert_eq!(r.error, None);
        assert_eq!(r.rdd, Some(0.0));
        assert_eq!(r.mst_edge_retention, Some(1.0));
        assert!(r.seconds > 0.0);
    }

    #[test]
    fn constructive_trial_keeps_the_tree_and_repeats() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = edm(&random_points(30, 3, &mut rng));
        let inst = Instance::mst_masked("uniform", d).unwrap();
        let cfg = TrialConfig::new(Method::C, 3);
        let a = run_trial(&cfg, &inst, 5);
        let b = run_trial(&cfg, &inst, 5);
        assert!(a.converged);
        assert_eq!(a.mst_edge_retention, Some(1.0));
        assert!(a.mst_distance_ratio.unwrap() < 1e-20);
        assert_eq!(a.without_timing(), b.without_timing());
    }

    #[test]
    fn tree_methods_refuse_richer_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = edm(&random_points(6, 2, &mut rng));
        let inst = Instance::new("full", d, AdjacencyMask::complete(6)).unwrap();
        let r = run_trial(&TrialConfig::new(Method::Dpflb, 2), &inst, 0);
        assert!(r.error.is_some());
        assert_eq!(r.rdd, None);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::COMPLETION_METHODS {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
        }
        assert!("sdp".parse::<Method>().is_err());
    }
}
