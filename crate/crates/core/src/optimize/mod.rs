//! Optimization-based completion: the dissimilarity formulation (with or
//! without tree lower bounds) and the position formulation.

mod descent;
mod dpf;
mod fp;
mod npf;

pub use descent::{DescentSettings, StopReason};
pub use dpf::{dpf_bounds, dpf_complete, dpflb_bounds, dpflb_complete, DpfConfig, DpfProblem};
pub use fp::{fp_gradient, fp_objective, FpForm};
pub use npf::{
    npf_complete, npf_gradient, npf_init, npf_objective, sample_segment_ratio, NpfConfig,
};

use std::time::Duration;

use crate::matrix::{PointConfiguration, SquaredDistanceMatrix};

/// A completed matrix with the configuration recovered from it.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub matrix: SquaredDistanceMatrix,
    pub points: PointConfiguration,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub stop: StopReason,
    pub duration: Duration,
}
