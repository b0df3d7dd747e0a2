//! Small dense linear algebra: the row-major matrix used for design matrices
//! and rotations, plus the tiny symmetric eigensolver behind the
//! subset-enumeration oracle. Nothing here is tuned for large p beyond simple
//! contiguous loops.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape mismatch");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    /// `A x` for a length-`cols` vector.
    pub fn matvec(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T x` for a length-`rows` vector.
    pub fn matvec_t(&self, x: &[F]) -> Vec<F> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![F::zero(); self.cols];
        for i in 0..self.rows {
            axpy(x[i], self.row(i), &mut out);
        }
        out
    }
}

pub fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc = acc + x * y;
    }
    acc
}

pub fn norm_sq<F: Scalar>(a: &[F]) -> F {
    dot(a, a)
}

pub fn norm<F: Scalar>(a: &[F]) -> F {
    norm_sq(a).sqrt()
}

/// `y += alpha * x`.
pub fn axpy<F: Scalar>(alpha: F, x: &[F], y: &mut [F]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale<F: Scalar>(alpha: F, x: &mut [F]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// Orthonormalizes the rows in place by modified Gram-Schmidt with one
/// reorthogonalization pass. Input rows must be linearly independent (holds
/// almost surely for the Gaussian matrices this is used on).
pub fn orthonormalize_rows<F: Scalar>(m: &mut Matrix<F>) {
    let n = m.rows();
    for i in 0..n {
        for _ in 0..2 {
            for k in 0..i {
                let r = dot(m.row(i), m.row(k));
                // Borrow dance: copy row k, then update row i.
                let rk: Vec<F> = m.row(k).to_vec();
                axpy(-r, &rk, m.row_mut(i));
            }
        }
        let nrm = norm(m.row(i));
        assert!(nrm > F::cast(1e-300), "degenerate row in orthonormalization");
        scale(F::one() / nrm, m.row_mut(i));
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix given as a dense
/// row-major `n x n` slice. Returns eigenvalues and the matrix of
/// eigenvectors as rows (`vecs.row(k)` is the eigenvector for `vals[k]`).
/// Intended for the tiny subset systems (n <= 12).
pub fn sym_eigen<F: Scalar>(n: usize, a: &[F]) -> (Vec<F>, Matrix<F>) {
    assert_eq!(a.len(), n * n);
    let mut a: Vec<F> = a.to_vec();
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        v.row_mut(i)[i] = F::one();
    }
    let eps = F::cast(1e-14);
    for _sweep in 0..60 {
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        let scale_ref: F = (0..n).map(|i| a[i * n + i].abs()).sum::<F>() + F::cast(1e-300);
        if off.sqrt() <= eps * scale_ref {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == F::zero() {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (F::cast(2.0) * apq);
                let t = {
                    let s = if theta >= F::zero() { F::one() } else { -F::one() };
                    s / (theta.abs() + (F::one() + theta * theta).sqrt())
                };
                let c = F::one() / (F::one() + t * t).sqrt();
                let s = t * c;
                // Rotate rows/columns p and q of the symmetric matrix.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vpk = v.row(p)[k];
                    let vqk = v.row(q)[k];
                    v.row_mut(p)[k] = c * vpk - s * vqk;
                    v.row_mut(q)[k] = s * vpk + c * vqk;
                }
            }
        }
    }
    let vals: Vec<F> = (0..n).map(|i| a[i * n + i]).collect();
    (vals, v)
}

/// Minimum-norm solution of the symmetric system `A x = b` through the
/// eigendecomposition, zeroing eigenvalues below `cutoff_rel * max|lambda|`.
/// Matches pseudo-inverse behavior on consistent degenerate systems.
pub fn sym_pseudo_solve<F: Scalar>(n: usize, a: &[F], b: &[F], cutoff_rel: F) -> Vec<F> {
    let (vals, vecs) = sym_eigen(n, a);
    let lmax = vals.iter().fold(F::zero(), |m, &l| m.max(l.abs()));
    let cutoff = cutoff_rel * lmax;
    let mut x = vec![F::zero(); n];
    for k in 0..n {
        if vals[k].abs() <= cutoff {
            continue;
        }
        let coef = dot(vecs.row(k), b) / vals[k];
        axpy(coef, vecs.row(k), &mut x);
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use rand::Rng;

    #[test]
    fn matvec_and_transpose_agree_with_hand_computation() {
        let m = Matrix::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(m.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        assert_eq!(m.matvec_t(&[1.0, 1.0]), vec![5.0, 7.0, 9.0]);
    }

    #[test]
    fn gram_schmidt_produces_orthonormal_rows() {
        let p = 24;
        let mut rng = stream_rng(11, 0);
        let data: Vec<f64> = (0..p * p)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        let mut m = Matrix::from_vec(p, p, data);
        orthonormalize_rows(&mut m);
        for i in 0..p {
            for j in 0..p {
                let d = dot(m.row(i), m.row(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-12, "({i},{j}) -> {d}");
            }
        }
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // diag(1, 3) rotated by 45 degrees: a = [[2, 1], [1, 2]].
        let (mut vals, vecs) = sym_eigen::<f64>(2, &[2.0, 1.0, 1.0, 2.0]);
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        for k in 0..2 {
            assert!((norm(vecs.row(k)) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobi_reconstructs_random_symmetric_matrices() {
        let n = 9;
        let mut rng = stream_rng(5, 1);
        let mut a = vec![0.0f64; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.random::<f64>() - 0.5;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let (vals, vecs) = sym_eigen(n, &a);
        // A ?= V^T diag(vals) V with eigenvectors as rows of V.
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += vecs.row(k)[i] * vals[k] * vecs.row(k)[j];
                }
                assert!((acc - a[i * n + j]).abs() < 1e-10, "({i},{j})");
            }
        }
    }

    #[test]
    fn pseudo_solve_handles_singular_consistent_systems() {
        // Rank-1 system: A = [[2, 2], [2, 2]], b = (2, 2); min-norm x = (0.5, 0.5).
        let x = sym_pseudo_solve::<f64>(2, &[2.0, 2.0, 2.0, 2.0], &[2.0, 2.0], 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-12);
        assert!((x[1] - 0.5).abs() < 1e-12);

        let x = sym_pseudo_solve::<f64>(2, &[4.0, 1.0, 1.0, 3.0], &[9.0, 7.0], 1e-12);
        assert!((4.0 * x[0] + x[1] - 9.0).abs() < 1e-12);
        assert!((x[0] + 3.0 * x[1] - 7.0).abs() < 1e-12);
    }
}
