//! Classical multidimensional scaling and principal coordinates.

use super::{eig_sym, tau_matrix, Matrix, PointConfiguration, SquaredDistanceMatrix, PSD_TOL};
use crate::error::{Error, Result};

/// Embedding returned by [`classical_mds_detailed`].
#[derive(Debug, Clone, PartialEq)]
pub struct MdsOutcome {
    pub points: PointConfiguration,
    /// The `p` leading eigenvalues of `tau(D)`, before clamping.
    pub leading_eigenvalues: Vec<f64>,
    /// How many of those were negative beyond rounding, relative to the
    /// largest eigenvalue. Every negative value is replaced by zero.
    pub clamped: usize,
}

/// Embeds a fully observed dissimilarity matrix in `ℝ^p` by taking the `p`
/// leading eigenpairs of `tau(D)`.
pub fn classical_mds(d: &SquaredDistanceMatrix, p: usize) -> Result<PointConfiguration> {
    Ok(classical_mds_detailed(d, p)?.points)
}

pub fn classical_mds_detailed(d: &SquaredDistanceMatrix, p: usize) -> Result<MdsOutcome> {
    mds_from_matrix(d.ensure_complete()?, p)
}

/// Same as [`classical_mds_detailed`] for a raw symmetric hollow matrix whose
/// entries need not be a valid dissimilarity.
pub(crate) fn mds_from_matrix(d: &Matrix, p: usize) -> Result<MdsOutcome> {
    let n = d.ensure_square()?;
    if p == 0 || p > n {
        return Err(Error::InvalidDimension { p, n });
    }
    let eig = eig_sym(&tau_matrix(d))?;
    let leading: Vec<f64> = eig.values[..p].to_vec();
    let cutoff = -PSD_TOL * leading[0].abs();
    let clamped = leading.iter().filter(|&&v| v < cutoff).count();
    let scales: Vec<f64> = leading.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let coords = Matrix::from_fn(n, p, |i, k| eig.vectors[(i, k)] * scales[k]);
    Ok(MdsOutcome {
        points: PointConfiguration::new(coords)?,
        leading_eigenvalues: leading,
        clamped,
    })
}

/// Centers the configuration and rotates it onto its principal axes, in order
/// of decreasing variance. The largest-magnitude entry of each output column
/// is made positive.
pub fn principal_coords(x: &PointConfiguration) -> Result<PointConfiguration> {
    let xc = x.coords().column_centered();
    let cov = xc.transpose().matmul(&xc)?;
    let eig = eig_sym(&cov)?;
    let mut y = xc.matmul(&eig.vectors)?;
    for k in 0..y.cols() {
        let mut pivot = 0.0f64;
        for i in 0..y.rows() {
            if y[(i, k)].abs() > pivot.abs() {
                pivot = y[(i, k)];
            }
        }
        if pivot < 0.0 {
            for i in 0..y.rows() {
                y[(i, k)] = -y[(i, k)];
            }
        }
    }
    PointConfiguration::new(y)
}
