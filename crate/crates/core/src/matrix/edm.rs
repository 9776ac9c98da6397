//! Distance matrices, Gram matrices, point configurations and the operators
//! relating them.

use super::{eigvals_sym, Matrix};
use crate::error::{Error, Result};

/// Relative tolerance used when validating symmetry and hollowness.
const SHAPE_TOL: f64 = 1e-12;

/// Default relative tolerance for positive semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-9;

/// Hollow, symmetric, nonnegative matrix of squared dissimilarities. Entries
/// may be marked missing; a matrix with no missing marks is fully observed.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix {
    values: Matrix,
    known: Option<Vec<bool>>,
}

impl SquaredDistanceMatrix {
    /// Validates and normalizes a fully observed matrix: asymmetry and
    /// diagonal entries up to `1e-12` of the largest entry are cleaned up,
    /// anything larger is rejected.
    pub fn new(values: Matrix) -> Result<Self> {
        let values = validate(values, None)?;
        Ok(Self {
            values,
            known: None,
        })
    }

    /// A partially observed matrix. `known` is row-major `n * n`; the diagonal
    /// is always treated as known. Values at unknown positions are zeroed.
    pub fn with_missing(values: Matrix, known: Vec<bool>) -> Result<Self> {
        let n = values.ensure_square()?;
        if known.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: (n, n),
                got: (known.len(), 1),
            });
        }
        let mut known = known;
        for i in 0..n {
            known[i * n + i] = true;
            for j in (i + 1)..n {
                if known[i * n + j] != known[j * n + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        let mut values = values;
        for i in 0..n {
            for j in 0..n {
                if !known[i * n + j] {
                    values[(i, j)] = 0.0;
                }
            }
        }
        let values = validate(values, Some(&known))?;
        if known.iter().all(|&k| k) {
            return Ok(Self {
                values,
                known: None,
            });
        }
        Ok(Self {
            values,
            known: Some(known),
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: Matrix::zeros(n, n),
            known: None,
        }
    }

    pub fn order(&self) -> usize {
        self.values.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.is_known(i, j).then(|| self.values[(i, j)])
    }

    pub fn is_known(&self, i: usize, j: usize) -> bool {
        match &self.known {
            None => true,
            Some(k) => k[i * self.order() + j],
        }
    }

    pub fn is_complete(&self) -> bool {
        self.known.is_none()
    }

    /// Row-major known-entry flags, if any entry is missing.
    pub fn known_mask(&self) -> Option<&[bool]> {
        self.known.as_deref()
    }

    /// Underlying values; missing entries read as zero.
    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn into_values(self) -> Matrix {
        self.values
    }

    pub fn ensure_complete(&self) -> Result<&Matrix> {
        if self.is_complete() {
            Ok(&self.values)
        } else {
            Err(Error::MissingEntries)
        }
    }

    /// Largest and smallest off-diagonal known entries.
    pub fn off_diagonal_range(&self) -> Option<(f64, f64)> {
        let n = self.order();
        let mut range: Option<(f64, f64)> = None;
        for i in 0..n {
            for j in (i + 1)..n {
                if let Some(v) = self.get(i, j) {
                    range = Some(match range {
                        None => (v, v),
                        Some((lo, hi)) => (lo.min(v), hi.max(v)),
                    });
                }
            }
        }
        range
    }

    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Ok(Self {
            values: validate(self.values.scaled(alpha), self.known.as_deref())?,
            known: self.known.clone(),
        })
    }
}

fn validate(mut values: Matrix, known: Option<&[bool]>) -> Result<Matrix> {
    let n = values.ensure_square()?;
    for i in 0..n {
        for j in 0..n {
            if !values[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    let scale = values.max_abs();
    let tol = SHAPE_TOL * scale;
    for i in 0..n {
        if values[(i, i)].abs() > tol {
            return Err(Error::NotHollow { index: i });
        }
        values[(i, i)] = 0.0;
        for j in (i + 1)..n {
            if known.is_some_and(|k| !k[i * n + j]) {
                continue;
            }
            let (a, b) = (values[(i, j)], values[(j, i)]);
            if (a - b).abs() > tol {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
            if a < -tol || b < -tol {
                return Err(Error::Negative { row: i, col: j });
            }
            let v = if a == b { a } else { 0.5 * (a + b) }.max(0.0);
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    Ok(values)
}

/// Symmetric matrix produced by [`tau`] or supplied as `X Xᵀ`. It is
/// positive semidefinite exactly when it comes from a Euclidean distance
/// matrix; see [`GramMatrix::is_psd`].
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(Matrix);

impl GramMatrix {
    pub fn new(values: Matrix) -> Result<Self> {
        values.ensure_symmetric(SHAPE_TOL)?;
        let mut values = values;
        values.symmetrize();
        Ok(Self(values))
    }

    pub fn from_points(x: &PointConfiguration) -> Self {
        Self(x.coords().gram())
    }

    pub fn order(&self) -> usize {
        self.0.rows()
    }

    pub fn values(&self) -> &Matrix {
        &self.0
    }

    pub fn into_values(self) -> Matrix {
        self.0
    }

    /// Smallest eigenvalue at least `-tol * λ_max`.
    pub fn is_psd(&self, tol: f64) -> Result<bool> {
        let vals = eigvals_sym(&self.0)?;
        let (max, min) = match (vals.first(), vals.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Ok(true),
        };
        Ok(min >= -tol * max.max(0.0))
    }
}

/// `n` points in `ℝ^p`, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConfiguration(Matrix);

impl PointConfiguration {
    pub fn new(coords: Matrix) -> Result<Self> {
        if coords.rows() == 0 || coords.cols() == 0 {
            return Err(Error::InvalidDimension {
                p: coords.cols(),
                n: coords.rows(),
            });
        }
        for i in 0..coords.rows() {
            for j in 0..coords.cols() {
                if !coords[(i, j)].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self(coords))
    }

    pub fn n(&self) -> usize {
        self.0.rows()
    }

    pub fn dim(&self) -> usize {
        self.0.cols()
    }

    pub fn coords(&self) -> &Matrix {
        &self.0
    }

    pub fn point(&self, i: usize) -> &[f64] {
        self.0.row(i)
    }

    pub fn into_coords(self) -> Matrix {
        self.0
    }

    /// The configuration formed by the first `q` coordinates of every point.
    pub fn leading_columns(&self, q: usize) -> Result<Self> {
        if q == 0 || q > self.dim() {
            return Err(Error::InvalidDimension { p: q, n: self.n() });
        }
        Ok(Self(Matrix::from_fn(self.n(), q, |i, j| self.0[(i, j)])))
    }

    /// The configuration restricted to the given rows, in order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Self::new(Matrix::from_fn(rows.len(), self.dim(), |i, j| {
            self.0[(rows[i], j)]
        }))
    }
}

/// Squared Euclidean distance between two points.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Squared distances between all pairs of points.
pub fn edm(x: &PointConfiguration) -> SquaredDistanceMatrix {
    let n = x.n();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = sq_dist(x.point(i), x.point(j));
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    SquaredDistanceMatrix {
        values: d,
        known: None,
    }
}

/// `1 gᵀ - 2G + g 1ᵀ` with `g = diag(G)`. Negative entries, which only arise
/// from an indefinite `G` or from rounding, are clamped to zero.
pub fn kappa(g: &GramMatrix) -> SquaredDistanceMatrix {
    let g = g.values();
    let n = g.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (g[(i, i)] + g[(j, j)] - 2.0 * g[(i, j)]).max(0.0);
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    SquaredDistanceMatrix {
        values: d,
        known: None,
    }
}

/// `-½ P D P`, the centered Gram matrix of a fully observed dissimilarity
/// matrix.
pub fn tau(d: &SquaredDistanceMatrix) -> Result<GramMatrix> {
    Ok(GramMatrix(tau_matrix(d.ensure_complete()?)))
}

pub(crate) fn tau_matrix(d: &Matrix) -> Matrix {
    let mut g = d.double_centered().scaled(-0.5);
    g.symmetrize();
    g
}

/// Outcome of an EDM membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdmCheck {
    pub is_edm: bool,
    /// Count of eigenvalues of `tau(D)` above `tol * λ_max`.
    pub embedding_dimension: usize,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Tests whether `D` is a Euclidean distance matrix: `tau(D)` must be
/// positive semidefinite to within `tol` relative to its largest eigenvalue.
pub fn is_edm(d: &SquaredDistanceMatrix, tol: f64) -> Result<EdmCheck> {
    let g = tau(d)?;
    let vals = eigvals_sym(g.values())?;
    let max = vals.first().copied().unwrap_or(0.0);
    let min = vals.last().copied().unwrap_or(0.0);
    let cutoff = tol * max.max(0.0);
    Ok(EdmCheck {
        is_edm: min >= -cutoff,
        embedding_dimension: vals.iter().filter(|&&v| v > cutoff).count(),
        min_eigenvalue: min,
        max_eigenvalue: max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, p: usize, seed: u64) -> PointConfiguration {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointConfiguration::new(Matrix::from_fn(n, p, |_, _| rng.random_range(-2.0..2.0))).unwrap()
    }

    fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn edm_two_points() {
        let x = PointConfiguration::new(Matrix::from_rows(&[[0.0], [3.0]])).unwrap();
        assert_eq!(
            edm(&x).values(),
            &Matrix::from_rows(&[[0.0, 9.0], [9.0, 0.0]])
        );
    }

    #[test]
    fn edm_single_point() {
        let x = PointConfiguration::new(Matrix::from_rows(&[[1.0, 2.0, 3.0]])).unwrap();
        assert_eq!(edm(&x).values(), &Matrix::zeros(1, 1));
    }

    #[test]
    fn edm_matches_double_loop() {
        let x = random_points(5, 3, 11);
        let d = edm(&x);
        for i in 0..5 {
            for j in 0..5 {
                let mut s = 0.0;
                for k in 0..3 {
                    let diff = x.coords()[(i, k)] - x.coords()[(j, k)];
                    s += diff * diff;
                }
                assert!((d.values()[(i, j)] - s).abs() <= 1e-14 * s.max(1.0));
            }
        }
    }

    #[test]
    fn kappa_examples() {
        let zero = GramMatrix::new(Matrix::zeros(3, 3)).unwrap();
        assert_eq!(kappa(&zero).values(), &Matrix::zeros(3, 3));
        let g = GramMatrix::new(Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]])).unwrap();
        assert_eq!(
            kappa(&g).values(),
            &Matrix::from_rows(&[[0.0, 4.0], [4.0, 0.0]])
        );
        let x = random_points(6, 2, 3);
        let via_gram = kappa(&GramMatrix::from_points(&x));
        assert!(rel_err(via_gram.values(), edm(&x).values()) < 1e-12);
    }

    #[test]
    fn tau_examples() {
        assert_eq!(
            tau(&SquaredDistanceMatrix::zeros(4)).unwrap().values(),
            &Matrix::zeros(4, 4)
        );
        let d = SquaredDistanceMatrix::new(Matrix::from_rows(&[[0.0, 4.0], [4.0, 0.0]])).unwrap();
        let g = tau(&d).unwrap();
        assert_eq!(g.values(), &Matrix::from_rows(&[[1.0, -1.0], [-1.0, 1.0]]));

        let x = random_points(7, 3, 5);
        let xc = PointConfiguration::new(x.coords().column_centered()).unwrap();
        let g = tau(&edm(&xc)).unwrap();
        assert!(rel_err(g.values(), &xc.coords().gram()) < 1e-10);
        for i in 0..7 {
            assert!(g.values().row(i).iter().sum::<f64>().abs() < 1e-10);
        }
    }

    #[test]
    fn tau_rejects_missing_entries() {
        let mut known = vec![true; 9];
        known[1] = false;
        known[3] = false;
        let d = SquaredDistanceMatrix::with_missing(Matrix::zeros(3, 3), known).unwrap();
        assert!(matches!(tau(&d), Err(Error::MissingEntries)));
    }

    #[test]
    fn is_edm_examples() {
        let x = random_points(8, 3, 9);
        let check = is_edm(&edm(&x), PSD_TOL).unwrap();
        assert!(check.is_edm);
        assert!(check.embedding_dimension <= 3);

        let bad = SquaredDistanceMatrix::new(Matrix::from_rows(&[
            [0.0, 1.0, 10.0],
            [1.0, 0.0, 1.0],
            [10.0, 1.0, 0.0],
        ]))
        .unwrap();
        let check = is_edm(&bad, PSD_TOL).unwrap();
        assert!(!check.is_edm);
        // numpy.linalg.eigvalsh of -½PDP gives {5, 0, -1}.
        assert!((check.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!((check.max_eigenvalue - 5.0).abs() < 1e-12);

        let check = is_edm(&SquaredDistanceMatrix::zeros(3), PSD_TOL).unwrap();
        assert!(check.is_edm);
        assert_eq!(check.embedding_dimension, 0);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            SquaredDistanceMatrix::new(Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]])),
            Err(Error::NotHollow { index: 0 })
        ));
        assert!(matches!(
            SquaredDistanceMatrix::new(Matrix::from_rows(&[[0.0, -1.0], [-1.0, 0.0]])),
            Err(Error::Negative { .. })
        ));
        assert!(matches!(
            SquaredDistanceMatrix::new(Matrix::from_rows(&[[0.0, 1.0], [2.0, 0.0]])),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(PointConfiguration::new(Matrix::zeros(0, 2)).is_err());
    }
}
