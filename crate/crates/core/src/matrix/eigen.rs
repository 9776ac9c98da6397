//! Symmetric eigensolvers.
//!
//! Two independent routes are provided: cyclic Jacobi rotations, which are
//! simple and deterministic, and Householder tridiagonalization followed by
//! implicit-shift QL iterations, which is several times faster for the
//! order-150 matrices that show up in the Iris experiments. [`eig_sym`]
//! picks between them by order; each is also exposed directly so the two can
//! be checked against one another.

use super::Matrix;
use crate::error::{Error, Result};

/// Largest order handled by the Jacobi route in [`eig_sym`].
pub const JACOBI_MAX_ORDER: usize = 16;

const JACOBI_SWEEP_CAP: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-12;
const QL_ITER_CAP: usize = 60;

/// Eigenvalues sorted descending with the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl EigenDecomposition {
    pub fn order(&self) -> usize {
        self.values.len()
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }

    /// `U diag(values) Uᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.order();
        let u = &self.vectors;
        let mut out = Matrix::zeros(n, n);
        for k in 0..n {
            let lam = self.values[k];
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = lam * u[(i, k)];
                for j in 0..n {
                    out[(i, j)] += a * u[(j, k)];
                }
            }
        }
        out
    }
}

/// Symmetric eigendecomposition, sorted descending.
///
/// Each eigenvector is normalized so that its largest-magnitude entry is
/// positive, which makes the output reproducible.
pub fn eig_sym(s: &Matrix) -> Result<EigenDecomposition> {
    if s.ensure_square()? <= JACOBI_MAX_ORDER {
        eig_sym_jacobi(s)
    } else {
        eig_sym_tridiagonal(s)
    }
}

/// Eigenvalues only, sorted descending.
pub fn eigvals_sym(s: &Matrix) -> Result<Vec<f64>> {
    let n = s.ensure_square()?;
    if n <= JACOBI_MAX_ORDER {
        return Ok(eig_sym_jacobi(s)?.values);
    }
    Tridiagonal::reduce(s).eigenvalues()
}

/// All eigenvalues (descending) with eigenvectors for the leading `k` only.
#[derive(Debug, Clone, PartialEq)]
pub struct LeadingEigen {
    pub values: Vec<f64>,
    /// `n × k`, one eigenvector per column.
    pub vectors: Matrix,
}

/// Eigenvalues plus the eigenvectors of the `k` largest.
///
/// Above [`JACOBI_MAX_ORDER`] the vectors come from inverse iteration on the
/// tridiagonal form, which skips the QL rotations of a full decomposition.
pub fn eig_sym_leading(s: &Matrix, k: usize) -> Result<LeadingEigen> {
    let n = s.ensure_square()?;
    if k > n {
        return Err(Error::InvalidDimension { p: k, n });
    }
    if n <= JACOBI_MAX_ORDER {
        let dec = eig_sym_jacobi(s)?;
        let vectors = Matrix::from_fn(n, k, |i, j| dec.vectors[(i, j)]);
        return Ok(LeadingEigen {
            values: dec.values,
            vectors,
        });
    }
    let tri = Tridiagonal::reduce(s);
    let values = tri.eigenvalues()?;
    let (d, sub) = (&tri.diag, &tri.sub);
    let norm = d
        .iter()
        .enumerate()
        .map(|(i, di)| {
            di.abs()
                + sub.get(i).map_or(0.0, |x| x.abs())
                + if i > 0 { sub[i - 1].abs() } else { 0.0 }
        })
        .fold(0.0_f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let cluster = 1e-3 * norm;
    let mut found: Vec<(f64, Vec<f64>)> = Vec::with_capacity(k);
    let mut vectors = Matrix::zeros(n, k);
    let mut shift = f64::INFINITY;
    for (col, &lambda) in values[..k].iter().enumerate() {
        // Separate coincident shifts so the solves differ.
        shift = if shift - lambda < 10.0 * f64::EPSILON * norm {
            shift - 10.0 * f64::EPSILON * norm
        } else {
            lambda
        };
        let mut z: Vec<f64> = (0..n)
            .map(|i| {
                (crate::seed::mix(col as u64, i as u64) >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        for _ in 0..3 {
            z = tridiagonal_solve(d, sub, shift, &z, norm);
            for (mu, v) in &found {
                if lambda - mu < cluster && mu - lambda < cluster {
                    let dot: f64 = z.iter().zip(v).map(|(a, b)| a * b).sum();
                    for (zi, vi) in z.iter_mut().zip(v) {
                        *zi -= dot * vi;
                    }
                }
            }
            let len = z.iter().map(|x| x * x).sum::<f64>().sqrt();
            for zi in &mut z {
                *zi /= len;
            }
        }
        let x = tri.back_transform(&z);
        let mut pivot = 0.0_f64;
        for &xi in &x {
            if xi.abs() > pivot.abs() {
                pivot = xi;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (i, xi) in x.iter().enumerate() {
            vectors[(i, col)] = sign * xi;
        }
        found.push((lambda, z));
    }
    Ok(LeadingEigen { values, vectors })
}

/// `S = Q T Qᵀ` with `T` symmetric tridiagonal and `Q` kept as Householder
/// reflectors `I - β v vᵀ`.
struct Tridiagonal {
    diag: Vec<f64>,
    /// `sub[i]` couples rows `i` and `i + 1`.
    sub: Vec<f64>,
    /// Reflector `k` acts on coordinates `k + 1..n`.
    reflectors: Vec<(f64, Vec<f64>)>,
}

impl Tridiagonal {
    fn reduce(s: &Matrix) -> Self {
        let n = s.rows();
        let mut a = s.clone();
        a.symmetrize();
        let mut diag = vec![0.0; n];
        let mut sub = vec![0.0; n.saturating_sub(1)];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
        let mut p = vec![0.0; n];
        for k in 0..n {
            diag[k] = a[(k, k)];
            if k + 1 >= n {
                break;
            }
            let m = n - k - 1;
            let mut v = a.row(k)[k + 1..].to_vec();
            let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let alpha = if v[0] > 0.0 { -len } else { len };
            v[0] -= alpha;
            let vv: f64 = v.iter().map(|x| x * x).sum();
            if k + 2 >= n || vv == 0.0 {
                sub[k] = if k + 2 >= n { a[(k, k + 1)] } else { alpha };
                if k + 2 < n {
                    reflectors.push((0.0, v));
                }
                continue;
            }
            sub[k] = alpha;
            let beta = 2.0 / vv;
            for i in 0..m {
                let row = &a.row(k + 1 + i)[k + 1..];
                p[i] = beta * row.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
            }
            let pv: f64 = p[..m].iter().zip(&v).map(|(x, y)| x * y).sum();
            let half = 0.5 * beta * pv;
            for i in 0..m {
                p[i] -= half * v[i];
            }
            for i in 0..m {
                let (vi, wi) = (v[i], p[i]);
                let row = &mut a.row_mut(k + 1 + i)[k + 1..];
                for j in 0..m {
                    row[j] -= vi * p[j] + wi * v[j];
                }
            }
            reflectors.push((beta, v));
        }
        Self {
            diag,
            sub,
            reflectors,
        }
    }

    fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.diag.len();
        let mut d = self.diag.clone();
        let mut e = vec![0.0; n];
        if n > 1 {
            e[1..].copy_from_slice(&self.sub);
        }
        tql2(&mut d, &mut e, None)?;
        d.sort_by(|a, b| b.total_cmp(a));
        Ok(d)
    }

    /// `Q z`.
    fn back_transform(&self, z: &[f64]) -> Vec<f64> {
        let mut x = z.to_vec();
        for (k, (beta, v)) in self.reflectors.iter().enumerate().rev() {
            if *beta == 0.0 {
                continue;
            }
            let tail = &mut x[k + 1..];
            let dot: f64 = tail.iter().zip(v).map(|(a, b)| a * b).sum();
            for (t, vi) in tail.iter_mut().zip(v) {
                *t -= beta * dot * vi;
            }
        }
        x
    }
}

/// Solves `(T - σI) z = b` for symmetric tridiagonal `T` by Gaussian
/// elimination with partial pivoting. Zero pivots are replaced by
/// `ε‖T‖` so that solves at an exact eigenvalue still produce a direction.
fn tridiagonal_solve(diag: &[f64], sub: &[f64], sigma: f64, b: &[f64], norm: f64) -> Vec<f64> {
    let n = diag.len();
    let tiny = f64::EPSILON * norm;
    let guard = |x: f64| {
        if x.abs() < tiny {
            if x < 0.0 {
                -tiny
            } else {
                tiny
            }
        } else {
            x
        }
    };
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut rhs = b.to_vec();
    // Remaining row k holds (r0, r1) in columns k and k + 1.
    let mut r0 = diag[0] - sigma;
    let mut r1 = sub.first().copied().unwrap_or(0.0);
    for k in 0..n.saturating_sub(1) {
        let c = sub[k];
        let a = diag[k + 1] - sigma;
        let b2 = sub.get(k + 1).copied().unwrap_or(0.0);
        if c.abs() > r0.abs() {
            let l = r0 / c;
            u0[k] = c;
            u1[k] = a;
            u2[k] = b2;
            rhs.swap(k, k + 1);
            rhs[k + 1] -= l * rhs[k];
            r0 = r1 - l * a;
            r1 = -l * b2;
        } else {
            let p = guard(r0);
            let l = c / p;
            u0[k] = p;
            u1[k] = r1;
            u2[k] = 0.0;
            rhs[k + 1] -= l * rhs[k];
            r0 = a - l * r1;
            r1 = b2;
        }
    }
    u0[n - 1] = guard(r0);
    let mut z = vec![0.0; n];
    for k in (0..n).rev() {
        let mut v = rhs[k];
        if k + 1 < n {
            v -= u1[k] * z[k + 1];
        }
        if k + 2 < n {
            v -= u2[k] * z[k + 2];
        }
        z[k] = v / u0[k];
    }
    let big = z.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if big > 1e100 {
        for zi in &mut z {
            *zi /= big;
        }
    }
    z
}

/// Cyclic Jacobi: sweeps until the off-diagonal Frobenius norm drops below
/// `1e-12 * ‖S‖_F`.
pub fn eig_sym_jacobi(s: &Matrix) -> Result<EigenDecomposition> {
    let n = s.ensure_square()?;
    let mut a = s.clone();
    a.symmetrize();
    let mut v = Matrix::identity(n);
    let threshold = JACOBI_OFF_TOL * a.frobenius_norm();

    let mut converged = false;
    for _ in 0..JACOBI_SWEEP_CAP {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_p = c * akp - sn * akq;
                    let new_q = sn * akp + c * akq;
                    a[(k, p)] = new_p;
                    a[(p, k)] = new_p;
                    a[(k, q)] = new_q;
                    a[(q, k)] = new_q;
                }
                a[(p, p)] -= t * apq;
                a[(q, q)] += t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: JACOBI_SWEEP_CAP,
        });
    }

    let values: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    // Columns of v are eigenvectors; hand them over as rows.
    Ok(sorted(values, v.transpose()))
}

/// Householder tridiagonalization followed by implicit QL.
pub fn eig_sym_tridiagonal(s: &Matrix) -> Result<EigenDecomposition> {
    let n = s.ensure_square()?;
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: Matrix::zeros(0, 0),
        });
    }
    let (mut d, mut e, v) = tred2(s);
    // Work on the transpose so that QL rotations touch contiguous rows.
    let mut w = v.transpose();
    tql2(&mut d, &mut e, Some(&mut w))?;
    Ok(sorted(d, w))
}

/// Sorts descending and fixes signs. `rows` holds one eigenvector per row.
fn sorted(values: Vec<f64>, rows: Matrix) -> EigenDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]).then(i.cmp(&j)));
    let mut vectors = Matrix::zeros(n, n);
    for (k, &src) in order.iter().enumerate() {
        let row = rows.row(src);
        let mut pivot = 0.0_f64;
        for &x in row {
            if x.abs() > pivot.abs() {
                pivot = x;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (i, &x) in row.iter().enumerate() {
            vectors[(i, k)] = sign * x;
        }
    }
    EigenDecomposition {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors,
    }
}

/// Householder reduction to tridiagonal form (EISPACK `tred2`). Returns the
/// diagonal, the subdiagonal (in `e[1..]`) and the accumulated orthogonal
/// transformation.
fn tred2(s: &Matrix) -> (Vec<f64>, Vec<f64>, Matrix) {
    let n = s.rows();
    let mut v = s.clone();
    v.symmetrize();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n == 0 {
        return (d, e, v);
    }
    d.copy_from_slice(v.row(n - 1));

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in &mut e[..i] {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    for i in 0..(n - 1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
    (d, e, v)
}

/// Implicit-shift QL on a symmetric tridiagonal matrix (EISPACK `tql2`).
/// When `w` is given, its rows are rotated along, so on entry row `i` of `w`
/// should be column `i` of the tridiagonalizing transformation.
fn tql2(d: &mut [f64], e: &mut [f64], mut w: Option<&mut Matrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_ITER_CAP {
                    return Err(Error::NoConvergence { sweeps: iter });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[(l + 2)..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        rotate_rows(w, i, c, s);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[inline]
fn rotate_rows(w: &mut Matrix, i: usize, c: f64, s: f64) {
    let cols = w.cols();
    let data = w.as_mut_slice();
    let (head, tail) = data.split_at_mut((i + 1) * cols);
    let ri = &mut head[i * cols..];
    let rn = &mut tail[..cols];
    for (a, b) in ri.iter_mut().zip(rn.iter_mut()) {
        let h = *b;
        *b = s * *a + c * h;
        *a = c * *a - s * h;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        m.symmetrize();
        m
    }

    fn check(s: &Matrix, dec: &EigenDecomposition) {
        let n = s.rows();
        let recon = dec.reconstruct();
        let err = recon.sub(s).unwrap().frobenius_norm();
        assert!(
            err <= 1e-10 * s.frobenius_norm().max(1.0),
            "reconstruction error {err}"
        );
        let utu = dec.vectors.transpose().matmul(&dec.vectors).unwrap();
        let orth = utu.sub(&Matrix::identity(n)).unwrap().frobenius_norm();
        assert!(orth < 1e-10, "orthogonality error {orth}");
        for w in dec.values.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn diagonal_case() {
        let s = Matrix::from_rows(&[[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]]);
        for dec in [
            eig_sym_jacobi(&s).unwrap(),
            eig_sym_tridiagonal(&s).unwrap(),
        ] {
            assert_eq!(dec.values, vec![3.0, 2.0, 1.0]);
            assert_eq!(dec.vector(0), vec![1.0, 0.0, 0.0]);
            assert_eq!(dec.vector(1), vec![0.0, 0.0, 1.0]);
            assert_eq!(dec.vector(2), vec![0.0, 1.0, 0.0]);
        }
    }

    #[test]
    fn two_by_two_swap() {
        let s = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        for dec in [
            eig_sym_jacobi(&s).unwrap(),
            eig_sym_tridiagonal(&s).unwrap(),
        ] {
            assert!((dec.values[0] - 1.0).abs() < 1e-15);
            assert!((dec.values[1] + 1.0).abs() < 1e-15);
            check(&s, &dec);
        }
    }

    // Reference eigenvalues computed once offline with LAPACK (numpy.linalg.eigvalsh)
    // for the matrix below.
    #[test]
    fn matches_offline_reference_10x10() {
        let s = Matrix::from_fn(10, 10, |i, j| {
            let (i, j) = (i as f64, j as f64);
            ((i + 1.0) * (j + 1.0)).sin() + if i == j { i * 0.5 } else { 0.0 }
        });
        let expected = [
            5.919_783_967_567_865,
            5.069_921_056_829_234,
            4.648_914_430_321_171,
            3.514_674_890_286_031_4,
            3.297_967_921_689_845_6,
            0.303_721_783_989_931_2,
            -0.048_957_440_034_560_61,
            -0.272_361_106_063_320_76,
            -0.408_050_673_394_731_2,
            -1.610_842_026_602_586_5,
        ];
        for dec in [
            eig_sym_jacobi(&s).unwrap(),
            eig_sym_tridiagonal(&s).unwrap(),
        ] {
            for (got, want) in dec.values.iter().zip(expected) {
                assert!((got - want).abs() < 1e-12, "{got} vs {want}");
            }
            check(&s, &dec);
        }
    }

    #[test]
    fn routes_agree_on_random_matrices() {
        for (n, seed) in [(1, 1), (5, 2), (17, 3), (40, 4)] {
            let s = random_symmetric(n, seed);
            let a = eig_sym_jacobi(&s).unwrap();
            let b = eig_sym_tridiagonal(&s).unwrap();
            check(&s, &a);
            check(&s, &b);
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-12);
            }
            let vals = eigvals_sym(&s).unwrap();
            for (x, y) in vals.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let mut s = Matrix::identity(30).scaled(2.0);
        s[(0, 0)] = 5.0;
        let dec = eig_sym(&s).unwrap();
        check(&s, &dec);
        assert!((dec.values[0] - 5.0).abs() < 1e-14);
        assert!(dec.values[1..].iter().all(|v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn leading_pairs_match_the_full_decomposition() {
        let mut cases: Vec<Matrix> = [(6, 11), (17, 12), (60, 13), (150, 14)]
            .iter()
            .map(|&(n, seed)| random_symmetric(n, seed))
            .collect();
        // Low-rank plus a repeated leading eigenvalue.
        let mut low = Matrix::zeros(40, 40);
        for i in 0..40 {
            for j in 0..40 {
                low[(i, j)] = ((i % 3) as f64 - 1.0) * ((j % 3) as f64 - 1.0);
            }
        }
        cases.push(low);
        let mut rep = Matrix::identity(30).scaled(2.0);
        rep[(0, 0)] = 5.0;
        rep[(1, 1)] = 5.0;
        cases.push(rep);
        for s in cases {
            let n = s.rows();
            let k = 4.min(n);
            let full = eig_sym(&s).unwrap();
            let lead = eig_sym_leading(&s, k).unwrap();
            for (a, b) in full.values.iter().zip(&lead.values) {
                assert!((a - b).abs() < 1e-12 * s.frobenius_norm().max(1.0));
            }
            let u = &lead.vectors;
            let su = s.matmul(u).unwrap();
            for j in 0..k {
                for i in 0..n {
                    let r = su[(i, j)] - lead.values[j] * u[(i, j)];
                    assert!(
                        r.abs() < 1e-10 * s.frobenius_norm().max(1.0),
                        "residual {r}"
                    );
                }
            }
            let utu = u.transpose().matmul(u).unwrap();
            assert!(utu.sub(&Matrix::identity(k)).unwrap().max_abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_square() {
        assert!(eig_sym(&Matrix::zeros(2, 3)).is_err());
    }
}
