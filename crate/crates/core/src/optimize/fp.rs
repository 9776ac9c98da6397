//! Spectral objective measuring how far a symmetric matrix is from being
//! positive semidefinite with rank at most `p`.

use crate::error::{Error, Result};
use crate::matrix::{eig_sym_leading, eigvals_sym, LeadingEigen, Matrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FpForm {
    /// `Σ_{i≤p} min(λ_i, 0)² + Σ_{i>p} λ_i²`: squared distance to the nearest
    /// positive semidefinite matrix of rank at most `p`.
    #[default]
    Projection,
    /// `Σ_{i≤p} (λ_i - λ_1)² + Σ_{i>p} λ_i²`.
    Literal,
}

fn check(s: &Matrix, p: usize) -> Result<()> {
    let n = s.ensure_square()?;
    if p == 0 || p > n {
        return Err(Error::InvalidDimension { p, n });
    }
    Ok(())
}

pub(crate) fn value_from_eigenvalues(values: &[f64], p: usize, form: FpForm) -> f64 {
    let (head, tail) = values.split_at(p.min(values.len()));
    let tail_sum: f64 = tail.iter().map(|v| v * v).sum();
    let head_sum: f64 = match form {
        FpForm::Projection => head.iter().map(|v| v.min(0.0).powi(2)).sum(),
        FpForm::Literal => head.iter().map(|v| (v - head[0]).powi(2)).sum(),
    };
    head_sum + tail_sum
}

/// Objective value; eigenvalues only.
pub fn fp_objective(s: &Matrix, p: usize, form: FpForm) -> Result<f64> {
    check(s, p)?;
    Ok(value_from_eigenvalues(&eigvals_sym(s)?, p, form))
}

/// Objective value and its gradient with respect to `S`.
pub fn fp_gradient(s: &Matrix, p: usize, form: FpForm) -> Result<(f64, Matrix)> {
    check(s, p)?;
    let eig = eig_sym_leading(s, p)?;
    Ok(gradient_from_decomposition(s, &eig, p, form))
}

/// Gradient assembled from the leading `p` eigenpairs (`eig` must hold at
/// least `p` vectors):
/// projection form `2(S - Π(S))` with `Π` keeping the positive leading part,
/// literal form `2(S - Σ_{i≤p} λ_i u_i u_iᵀ) + Σ_{i≤p} 2(λ_i - λ_1)(u_i u_iᵀ - u_1 u_1ᵀ)`.
pub(crate) fn gradient_from_decomposition(
    s: &Matrix,
    eig: &LeadingEigen,
    p: usize,
    form: FpForm,
) -> (f64, Matrix) {
    let n = s.rows();
    let value = value_from_eigenvalues(&eig.values, p, form);
    // coefficient c_k of u_k u_kᵀ subtracted from S, so that
    // grad = 2 (S - Σ c_k u_k u_kᵀ).
    let mut coeffs = vec![0.0; p];
    match form {
        FpForm::Projection => {
            for k in 0..p {
                coeffs[k] = eig.values[k].max(0.0);
            }
        }
        FpForm::Literal => {
            let top = eig.values[0];
            coeffs.fill(top);
            coeffs[0] += (0..p).map(|k| eig.values[k] - top).sum::<f64>();
        }
    }
    let mut grad = s.scaled(2.0);
    let u = &eig.vectors;
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        for i in 0..n {
            let a = 2.0 * c * u[(i, k)];
            if a == 0.0 {
                continue;
            }
            let row = grad.row_mut(i);
            for j in 0..n {
                row[j] -= a * u[(j, k)];
            }
        }
    }
    (value, grad)
}
